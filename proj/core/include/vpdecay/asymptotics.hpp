#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vpdecay/diagnostics.hpp"
#include "vpdecay/field.hpp"
#include "vpdecay/types.hpp"

namespace vpdecay {

struct DecayFit {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double exponent = 0.0;
  double stderr_exponent = 0.0;
  double intercept = 0.0;  ///< natural log of the prefactor
  double residual_rms = 0.0;
  int points = 0;
};

/// OLS of log(value) on log(t) for t in [t_lo, t_hi]. Requires >= 5 points
/// in the window and t_lo >= 1; throws std::invalid_argument naming the time
/// of the first nonpositive value.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value, double t_lo, double t_hi);

struct ProfileErrorRow {
  double t = 0.0;
  double error = 0.0;
  double noise = 0.0;  ///< rescaled kernel noise of the density, 0 for the oracle
};

struct ProfileErrorSeries {
  int ell = 0;
  std::vector<ProfileErrorRow> rows;
  std::optional<DecayFit> fit;  ///< when >= 5 rows

  /// error(t_{k+1}) / error(t_k).
  std::vector<double> ratios() const;
};

using LimitFunction = std::function<double(const Vec3&)>;

/// sup over each grid of |t^{ell+3} rho(t, x) - rho_lim(x / t)|. Warns when
/// the kernel noise exceeds 30 % of the discrepancy.
ProfileErrorSeries profile_error(const std::vector<DensityField>& densities, const LimitFunction& rho_lim, int ell);
ProfileErrorSeries profile_error(const std::vector<DensityField>& densities, const LimitProfile& rho_lim, int ell);

struct Extrapolation {
  std::vector<double> limit;
  double cauchy_residual = 0.0;  ///< max |F(t_K) - F(t_{K-1})|
  std::vector<std::size_t> nonconvergent;  ///< nodes whose corrections grow
};

/// Node-wise elimination of a c / t error from the last two samples:
/// F_inf = (t_K F_K - t_{K-1} F_{K-1}) / (t_K - t_{K-1}). Requires K >= 3
/// samples with increasing times.
Extrapolation extrapolate_limit(const std::vector<double>& times, const std::vector<std::vector<double>>& values);

/// Same on moment tables of one species and order; the result carries t = inf.
struct TableExtrapolation {
  MomentTable limit;
  double cauchy_residual = 0.0;
  std::vector<std::size_t> nonconvergent;
};
TableExtrapolation extrapolate_limit(const std::vector<MomentTable>& tables);

enum class ScatterMode { linear, modified };
std::string to_string(ScatterMode m);
ScatterMode scatter_mode_from_string(const std::string& tag);

struct ScatterConfig {
  ScatterMode mode = ScatterMode::linear;
  double hx = 0.0;  ///< g-frame position bandwidth (> 0)
  double hv = 0.0;  ///< velocity bandwidth (> 0)
  std::size_t max_probes = 256;
};

struct ScatteringRow {
  double t1 = 0.0;
  double t2 = 0.0;
  double defect = 0.0;
  double noise_floor = 0.0;
  bool inconclusive = false;  ///< defect < 3 x noise floor
};

/// sup over probe states of |g(t2, z) - g(t1, z)| by a 6D kernel estimate in
/// the g-frame, per species. Probes are evenly strided particles of the first
/// snapshot. Modified mode evaluates each estimate at
/// X + (q/m) ln(t) E0(V) and requires E0.
ScatteringRow scattering_defect(const Snapshot& s1, const Snapshot& s2, const ScatterConfig& cfg,
                                const LimitProfile* e0 = nullptr);

}  // namespace vpdecay
