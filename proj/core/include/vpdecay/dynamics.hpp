#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vpdecay/field.hpp"
#include "vpdecay/initial_data.hpp"
#include "vpdecay/types.hpp"

namespace vpdecay {

/// dt = dt0 while t < 1, then min(dt_max, eta * t).
struct StepPolicy {
  double dt0 = 0.05;
  double eta = 0.05;
  double dt_max = 0.05;

  double dt_at(double t) const { return t < 1.0 ? dt0 : std::min(dt_max, eta * t); }
};

struct RunConfig {
  double t_start = 0.0;
  double t_end = 160.0;
  StepPolicy steps{};
  std::vector<double> output_times;  ///< empty: 12 log-spaced times in [10, t_end]
  FieldConfig field{};
  std::uint64_t seed = 0;  ///< reserved
  /// KDE bandwidth for the sup |rho| column, in probe-grid spacings.
  double density_bandwidth = 2.5;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
  /// Output times, defaulted and sorted.
  std::vector<double> resolved_output_times() const;
};

/// n log-spaced times lo ... hi (inclusive).
std::vector<double> log_spaced(double lo, double hi, int n);

struct TimeSeriesRow {
  double t = 0.0;
  double sup_rho = 0.0;
  double sup_E = 0.0;
  double t53_sup_E = 0.0;
  double support_diameter = 0.0;
  double total_charge = 0.0;
  Vec3 momentum{0.0, 0.0, 0.0};
  bool sup_E_on_boundary = false;
};

/// Append-only series with strictly increasing t.
class TimeSeries {
 public:
  void append(const TimeSeriesRow& row);
  const std::vector<TimeSeriesRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  /// Column by name: t, sup_rho, sup_E, t53_sup_E, support_diameter, total_charge.
  std::vector<double> column(const std::string& name) const;

 private:
  std::vector<TimeSeriesRow> rows_;
};

/// Bounding-box diagonal of the g-frame positions of all species.
double support_diameter(const ParticleEnsemble& e);

/// Mutable physical-frame state advanced by kick-drift-kick leapfrog. The
/// acceleration at the current state is cached so each step costs one field
/// evaluation. dt may be negative (time reversal).
class Integrator {
 public:
  Integrator(const Snapshot& s, FieldConfig cfg);

  /// One KDK step; throws std::runtime_error naming the time if a coordinate
  /// becomes non-finite.
  void step(double dt);
  /// One KDK step ending exactly at t_new.
  void advance_to(double t_new);
  double time() const { return t_; }
  Snapshot snapshot() const;
  std::size_t field_evaluations() const { return evaluations_; }

 private:
  void accelerate();
  void kdk(double dt, double t_new);

  double t_;
  FieldConfig cfg_;
  ParticleEnsemble template_;  ///< species and shared weights
  std::vector<std::vector<Vec3>> x_, v_, a_;
  std::size_t evaluations_ = 0;
};

/// Single KDK step from a snapshot. Requires dt > 0.
Snapshot step(const Snapshot& s, double dt, const FieldConfig& cfg);

/// Row of the time series for a snapshot.
TimeSeriesRow observe(const Snapshot& s, const FieldConfig& cfg, double density_bandwidth = 2.5);

using RunObserver = std::function<void(const Snapshot&, const TimeSeriesRow&)>;

struct RunResult {
  std::vector<Snapshot> snapshots;  ///< at output times (empty if not kept)
  TimeSeries series;
  std::size_t steps = 0;
};

/// Integrates from t_start to the last output time, hitting every output time
/// exactly. observer (optional) is called at every output time.
RunResult run(const ParticleEnsemble& initial, const RunConfig& rc, const RunObserver& observer = {},
              bool keep_snapshots = true);
RunResult run(const InitialDataSpec& spec, const RunConfig& rc, const RunObserver& observer = {},
              bool keep_snapshots = true);

/// sup_t t^{5/3} |E(t)|_inf over the series.
double assumption_A(const TimeSeries& ts);

struct AssumptionAReport {
  double sup = 0.0;
  double t_at_sup = 0.0;
  bool non_increasing_after = true;  ///< t53 column non-increasing for t >= t_split
  bool holds = false;                ///< sup attained before t_split and non-increasing after
};
AssumptionAReport monitor_assumption_A(const TimeSeries& ts, double t_split = 10.0);

/// Per-species g-frame arrays of a snapshot.
struct GFrame {
  std::vector<std::vector<Vec3>> X, V;
  std::vector<std::vector<double>> w;
};
GFrame to_g_frame(const Snapshot& s);

}  // namespace vpdecay
