#include "vpdecay/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "vpdecay/diagnostics.hpp"

namespace vpdecay {

std::vector<double> log_spaced(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw std::invalid_argument("log_spaced: need 0 < lo <= hi, n >= 1");
  if (n == 1) return {lo};
  std::vector<double> t(n);
  const double r = std::log(hi / lo);
  for (int i = 0; i < n; ++i) t[i] = lo * std::exp(r * i / (n - 1));
  t.front() = lo;
  t.back() = hi;
  return t;
}

void RunConfig::validate() const {
  if (!(t_start >= 0.0)) throw std::invalid_argument("t_start: must be >= 0");
  if (!(t_end > 1.0)) throw std::invalid_argument("t_end: constraint t_end > 1 violated");
  if (!(steps.dt0 > 0.0)) throw std::invalid_argument("dt0: must be > 0");
  if (!(steps.eta > 0.0 && steps.eta <= 0.2)) throw std::invalid_argument("eta: constraint 0 < eta <= 0.2 violated");
  if (!(steps.dt_max > 0.0)) throw std::invalid_argument("dt_max: must be > 0");
  if (!(density_bandwidth >= 1.0)) throw std::invalid_argument("density_bandwidth: must be >= 1");
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    if (!(output_times[i] >= t_start) || !(output_times[i] <= t_end)) {
      throw std::invalid_argument("output_times: every time must lie in [t_start, t_end]");
    }
    if (i > 0 && !(output_times[i] > output_times[i - 1])) {
      throw std::invalid_argument("output_times: must be strictly increasing");
    }
  }
  field.validate();
}

std::vector<double> RunConfig::resolved_output_times() const {
  if (!output_times.empty()) return output_times;
  if (t_end > 10.0 && t_start <= 10.0) return log_spaced(10.0, t_end, 12);
  return {t_end};
}

void TimeSeries::append(const TimeSeriesRow& row) {
  if (!rows_.empty() && !(row.t > rows_.back().t)) {
    throw std::invalid_argument("TimeSeries: times must be strictly increasing");
  }
  rows_.push_back(row);
}

std::vector<double> TimeSeries::column(const std::string& name) const {
  std::vector<double> c;
  c.reserve(rows_.size());
  for (const auto& r : rows_) {
    if (name == "t") c.push_back(r.t);
    else if (name == "sup_rho") c.push_back(r.sup_rho);
    else if (name == "sup_E") c.push_back(r.sup_E);
    else if (name == "t53_sup_E") c.push_back(r.t53_sup_E);
    else if (name == "support_diameter") c.push_back(r.support_diameter);
    else if (name == "total_charge") c.push_back(r.total_charge);
    else throw std::invalid_argument("unknown time series column '" + name + "'");
  }
  return c;
}

double support_diameter(const ParticleEnsemble& e) {
  Vec3 lo{}, hi{};
  bool any = false;
  for (const auto& sp : e) {
    for (const auto& x : sp.positions()) {
      if (!any) {
        lo = hi = x;
        any = true;
      }
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], x[a]);
        hi[a] = std::max(hi[a], x[a]);
      }
    }
  }
  return any ? norm(hi - lo) : 0.0;
}

// ------------------------------------------------------------- integrator

Integrator::Integrator(const Snapshot& s, FieldConfig cfg) : t_(s.time()), cfg_(cfg) {
  cfg_.validate();
  template_ = s.ensemble();
  for (std::size_t a = 0; a < template_.size(); ++a) {
    const auto x = s.physical_positions(a);
    const auto v = template_[a].velocities();
    x_.emplace_back(x.begin(), x.end());
    v_.emplace_back(v.begin(), v.end());
    a_.emplace_back(x.size(), Vec3{0.0, 0.0, 0.0});
  }
  accelerate();
}

void Integrator::accelerate() {
  SourceSet src;
  std::vector<Vec3> targets;
  for (std::size_t a = 0; a < template_.size(); ++a) {
    const double q = template_[a].species().charge;
    const auto w = template_[a].weights();
    std::vector<double> c(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) c[j] = q * w[j];
    src.add_block(x_[a], c);
    targets.insert(targets.end(), x_[a].begin(), x_[a].end());
  }
  const auto E = field_at(src, targets, cfg_, t_);
  ++evaluations_;

  Vec3 shift{0.0, 0.0, 0.0};
  if (cfg_.remove_net_force && cfg_.method == FieldMethod::tree) {
    Vec3 force{0.0, 0.0, 0.0};
    double mass = 0.0;
    std::size_t off = 0;
    for (std::size_t a = 0; a < template_.size(); ++a) {
      const auto w = template_[a].weights();
      Vec3 f{0.0, 0.0, 0.0};
      double m = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) {
        f += w[j] * E[off + j];
        m += w[j];
      }
      force += template_[a].species().charge * f;
      mass += template_[a].species().mass * m;
      off += w.size();
    }
    if (mass > 0.0) shift = (-1.0 / mass) * force;
  }
  std::size_t off = 0;
  for (std::size_t a = 0; a < template_.size(); ++a) {
    const double qm = template_[a].species().charge_to_mass();
    for (std::size_t j = 0; j < a_[a].size(); ++j) a_[a][j] = qm * E[off + j] + shift;
    off += a_[a].size();
  }
}

void Integrator::step(double dt) { kdk(dt, t_ + dt); }

void Integrator::advance_to(double t_new) { kdk(t_new - t_, t_new); }

void Integrator::kdk(double dt, double t_new) {
  const double h = 0.5 * dt;
  for (std::size_t a = 0; a < x_.size(); ++a) {
    for (std::size_t j = 0; j < x_[a].size(); ++j) {
      v_[a][j] += h * a_[a][j];
      x_[a][j] += dt * v_[a][j];
    }
  }
  t_ = t_new;
  accelerate();
  for (std::size_t a = 0; a < x_.size(); ++a) {
    for (std::size_t j = 0; j < x_[a].size(); ++j) {
      v_[a][j] += h * a_[a][j];
      for (int k = 0; k < 3; ++k) {
        if (!std::isfinite(x_[a][j][k]) || !std::isfinite(v_[a][j][k])) {
          std::ostringstream msg;
          msg << "step: non-finite coordinate at t=" << t_;
          throw std::runtime_error(msg.str());
        }
      }
    }
  }
}

Snapshot Integrator::snapshot() const {
  ParticleEnsemble phys;
  for (std::size_t a = 0; a < template_.size(); ++a) {
    phys.emplace_back(template_[a].species(), x_[a], v_[a], template_[a].shared_weights());
  }
  return Snapshot::from_physical(t_, phys);
}

Snapshot step(const Snapshot& s, double dt, const FieldConfig& cfg) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
  Integrator integ(s, cfg);
  integ.step(dt);
  return integ.snapshot();
}

TimeSeriesRow observe(const Snapshot& s, const FieldConfig& cfg, double density_bandwidth) {
  TimeSeriesRow r;
  r.t = s.time();
  const SourceSet src = physical_sources(s);
  const Grid3 probe = probe_grid(src, cfg.probe_resolution);
  const SupField sf = sup_field(src, probe, cfg, s.time());
  r.sup_E = sf.value;
  r.sup_E_on_boundary = sf.on_boundary;
  r.t53_sup_E = std::pow(s.time(), 5.0 / 3.0) * sf.value;
  const double h = density_bandwidth * std::max({probe.axes[0].spacing(), probe.axes[1].spacing(),
                                                 probe.axes[2].spacing()});
  r.sup_rho = density(s, probe, h).sup_norm();
  r.support_diameter = support_diameter(s.ensemble());
  r.total_charge = total_charge(s.ensemble());
  r.momentum = total_momentum(s.ensemble());
  return r;
}

RunResult run(const ParticleEnsemble& initial, const RunConfig& rc, const RunObserver& observer,
              bool keep_snapshots) {
  rc.validate();
  const auto times = rc.resolved_output_times();
  RunResult res;
  Integrator integ(Snapshot::from_g_frame(rc.t_start, initial), rc.field);
  for (double t_out : times) {
    while (integ.time() < t_out) {
      const double t = integ.time();
      const double dt = rc.steps.dt_at(t);
      // land exactly on the output time; avoid a sliver step
      if (t + dt >= t_out - 1e-9 * std::max(1.0, t_out)) {
        integ.advance_to(t_out);
      } else {
        integ.step(dt);
      }
      ++res.steps;
    }
    const Snapshot snap = integ.snapshot();
    const TimeSeriesRow row = observe(snap, rc.field, rc.density_bandwidth);
    res.series.append(row);
    if (observer) observer(snap, row);
    if (keep_snapshots) res.snapshots.push_back(snap);
  }
  return res;
}

RunResult run(const InitialDataSpec& spec, const RunConfig& rc, const RunObserver& observer, bool keep_snapshots) {
  return run(construct_ensemble(spec), rc, observer, keep_snapshots);
}

double assumption_A(const TimeSeries& ts) {
  if (ts.empty()) throw std::invalid_argument("assumption_A: empty series");
  double m = 0.0;
  for (const auto& r : ts.rows()) m = std::max(m, r.t53_sup_E);
  return m;
}

AssumptionAReport monitor_assumption_A(const TimeSeries& ts, double t_split) {
  AssumptionAReport r;
  r.sup = assumption_A(ts);
  for (const auto& row : ts.rows()) {
    if (row.t53_sup_E == r.sup) {
      r.t_at_sup = row.t;
      break;
    }
  }
  const auto& rows = ts.rows();
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k - 1].t >= t_split && rows[k].t53_sup_E > rows[k - 1].t53_sup_E * (1.0 + 1e-12)) {
      r.non_increasing_after = false;
    }
  }
  r.holds = r.t_at_sup < t_split && r.non_increasing_after;
  return r;
}

GFrame to_g_frame(const Snapshot& s) {
  GFrame g;
  for (const auto& sp : s.ensemble()) {
    g.X.emplace_back(sp.positions().begin(), sp.positions().end());
    g.V.emplace_back(sp.velocities().begin(), sp.velocities().end());
    g.w.emplace_back(sp.weights().begin(), sp.weights().end());
  }
  return g;
}

}  // namespace vpdecay
