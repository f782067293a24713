#pragma once

#include <functional>
#include <vector>

#include "vpdecay/field.hpp"
#include "vpdecay/initial_data.hpp"
#include "vpdecay/multi_index.hpp"
#include "vpdecay/types.hpp"

namespace vpdecay {

/// 1D smoothing kernel k(u) = (35/32)(1 - u^2)^3 on [-1, 1] and its
/// derivatives (order <= 6).
double kde_kernel(double u, int order = 0);

struct DensityField {
  double t = 0.0;
  Grid3 grid{};
  std::vector<double> values;
  double bandwidth = 0.0;
  /// Largest per-node sqrt(sum_j (q_j w_j K)^2): a scale for kernel noise.
  double noise = 0.0;
  /// Fraction of |charge| deposited outside the grid.
  double outside_fraction = 0.0;

  double sup_norm() const;
  /// Grid sum of rho times the cell volume.
  double integral() const;
  /// Samples of t^{ell+3} rho.
  std::vector<double> rescaled(int ell) const;
};

/// Kernel estimate rho(x) = sum_alpha q_alpha sum_j w_j K_h(x - x_j) at the
/// grid nodes from physical positions. Per particle and axis the sampled
/// kernel is normalized on the grid so the grid integral equals the total
/// charge of the deposited particles. Requires h >= grid spacing. Warns when
/// more than 0.1 % of the charge magnitude falls outside the grid.
DensityField density(const Snapshot& s, const Grid3& grid, double h);

/// Grid covering the physical support at time t of the analytic data
/// (x box + t v box), inflated by 5 %.
Grid3 free_stream_grid(const InitialData& data, double t, int n);

struct OracleValues {
  std::vector<double> values;
  double error = 0.0;  ///< accumulated quadrature error estimate
};

/// rho(t, x) = t^{-3} sum_alpha q_alpha int f0^alpha(y, (x - y)/t) dy for the
/// free transport of the analytic data, by adaptive Gauss-Legendre quadrature
/// of the separable factors. Throws std::runtime_error if the error estimate
/// exceeds 1e-12.
OracleValues free_stream_density(const InitialData& data, double t, const std::vector<Vec3>& points);

/// Same on a tensor grid; the 1D factor integrals are shared along each axis.
DensityField free_stream_density(const InitialData& data, double t, const Grid3& grid);

/// sup |E| of the oracle density: cell charges rho dx^3 at the grid nodes,
/// field evaluated at the cell centers.
double free_stream_field_sup(const InitialData& data, double t, int n, double theta = 0.5);

/// Analytic limit rho_{ell,inf}(v) of free transport:
/// sum_{|beta| = ell} (1/beta!) int (-y)^beta D^beta f0_net(y, v) dy.
double analytic_rho_ell(const InitialData& data, int ell, const Vec3& v);
LimitProfile analytic_rho_ell(const InitialData& data, int ell, const Grid3& vgrid);

struct MomentTable {
  int ell = 0;
  std::size_t species = 0;
  double t = 0.0;
  Grid3 grid{};
  std::vector<double> values;
  double bandwidth = 0.0;
};

/// F^{alpha,ell}(t, v) = sum_{|beta|=ell} (1/beta!) sum_j w_j (-X_j)^beta
/// D^beta K_h(v - V_j) per species, with g-frame X. Requires ell <= 3; warns
/// when h < 2 grid spacings.
std::vector<MomentTable> moment_table(const Snapshot& s, int ell, const Grid3& vgrid, double h);

/// Test function phi(v) with derivatives: value of D^beta phi at v.
using TestFunction = std::function<double(const Vec3&, const MultiIndex&)>;

/// Tensor test function from a compactly supported profile.
TestFunction test_function(const Profile3D& phi);
/// Gaussian exp(-|v - c|^2 / (2 s^2)) with derivatives.
TestFunction gaussian_test_function(const Vec3& center, double width);

/// M^{alpha,ell}[phi] = sum_{|beta|=ell} (1/beta!) sum_j w_j X_j^beta D^beta phi(V_j)
/// per species.
std::vector<double> tested_moment(const Snapshot& s, int ell, const TestFunction& phi);

/// rho_ell on the common velocity grid: sum_alpha q_alpha F^{alpha,ell}.
/// Tables must share grid and ell; charges are indexed by table species.
LimitProfile rho_ell(const std::vector<MomentTable>& tables, const std::vector<double>& charges);

/// rho_ell(t, x) = profile(x / t).
double rho_ell_at(const LimitProfile& profile, double t, const Vec3& x);

}  // namespace vpdecay
