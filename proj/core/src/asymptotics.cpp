#include "vpdecay/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace vpdecay {

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value, double t_lo, double t_hi) {
  if (t.size() != value.size()) throw std::invalid_argument("fit_decay: t and value differ in length");
  if (!(t_lo >= 1.0) || !(t_hi > t_lo)) throw std::invalid_argument("fit_decay: window needs 1 <= t_lo < t_hi");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(value[i] > 0.0)) {
      std::ostringstream msg;
      msg << "fit_decay: nonpositive value " << value[i] << " at t=" << t[i];
      throw std::invalid_argument(msg.str());
    }
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(value[i]));
  }
  const auto n = static_cast<int>(lx.size());
  if (n < 5) throw std::invalid_argument("fit_decay: at least 5 points required in the window");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_decay: times in the window are not distinct");
  DecayFit f;
  f.t_lo = t_lo;
  f.t_hi = t_hi;
  f.points = n;
  f.exponent = sxy / sxx;
  f.intercept = my - f.exponent * mx;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ly[i] - (f.intercept + f.exponent * lx[i]);
    ss += r * r;
  }
  f.residual_rms = std::sqrt(ss / n);
  f.stderr_exponent = std::sqrt(ss / (n - 2) / sxx);
  return f;
}

std::vector<double> ProfileErrorSeries::ratios() const {
  std::vector<double> r;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    r.push_back(rows[k - 1].error > 0.0 ? rows[k].error / rows[k - 1].error : 0.0);
  }
  return r;
}

ProfileErrorSeries profile_error(const std::vector<DensityField>& densities, const LimitFunction& rho_lim, int ell) {
  if (ell < 0) throw std::invalid_argument("profile_error: ell must be >= 0");
  ProfileErrorSeries out;
  out.ell = ell;
  for (const auto& d : densities) {
    if (!(d.t > 0.0)) throw std::invalid_argument("profile_error: densities need t > 0");
    if (!out.rows.empty() && !(d.t > out.rows.back().t)) {
      throw std::invalid_argument("profile_error: times must increase");
    }
    const double scale = std::pow(d.t, ell + 3);
    double err = 0.0;
    for (std::size_t f = 0; f < d.values.size(); ++f) {
      const Vec3 x = d.grid.node(f);
      const double diff = std::abs(scale * d.values[f] - rho_lim({x[0] / d.t, x[1] / d.t, x[2] / d.t}));
      err = std::max(err, diff);
    }
    ProfileErrorRow row{d.t, err, scale * d.noise};
    if (row.noise > 0.3 * row.error) {
      std::ostringstream msg;
      msg << "profile_error at t=" << d.t << ": kernel noise exceeds 30% of the discrepancy (inconclusive)";
      warn(msg.str());
    }
    out.rows.push_back(row);
  }
  if (out.rows.size() >= 5) {
    std::vector<double> t, e;
    for (const auto& r : out.rows) {
      if (r.t >= 1.0 && r.error > 0.0) {
        t.push_back(r.t);
        e.push_back(r.error);
      }
    }
    if (t.size() >= 5) out.fit = fit_decay(t, e, t.front(), t.back());
  }
  return out;
}

ProfileErrorSeries profile_error(const std::vector<DensityField>& densities, const LimitProfile& rho_lim, int ell) {
  return profile_error(densities, [&rho_lim](const Vec3& v) { return rho_lim.scalar_at(v); }, ell);
}

Extrapolation extrapolate_limit(const std::vector<double>& times, const std::vector<std::vector<double>>& values) {
  const std::size_t K = times.size();
  if (K < 3 || values.size() != K) throw std::invalid_argument("extrapolate_limit: need K >= 3 samples");
  for (std::size_t k = 1; k < K; ++k) {
    if (!(times[k] > times[k - 1])) throw std::invalid_argument("extrapolate_limit: times must increase");
    if (values[k].size() != values[0].size()) throw std::invalid_argument("extrapolate_limit: sample sizes differ");
  }
  const auto& a = values[K - 3];
  const auto& b = values[K - 2];
  const auto& c = values[K - 1];
  const double t1 = times[K - 2];
  const double t2 = times[K - 1];
  Extrapolation out;
  out.limit.resize(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    out.limit[i] = (t2 * c[i] - t1 * b[i]) / (t2 - t1);
    const double last = std::abs(c[i] - b[i]);
    const double prev = std::abs(b[i] - a[i]);
    out.cauchy_residual = std::max(out.cauchy_residual, last);
    if (last > prev && last > 0.0) out.nonconvergent.push_back(i);
  }
  return out;
}

TableExtrapolation extrapolate_limit(const std::vector<MomentTable>& tables) {
  if (tables.size() < 3) throw std::invalid_argument("extrapolate_limit: need K >= 3 tables");
  std::vector<double> t;
  std::vector<std::vector<double>> v;
  for (const auto& tab : tables) {
    if (tab.ell != tables.front().ell || tab.species != tables.front().species ||
        tab.values.size() != tables.front().values.size()) {
      throw std::invalid_argument("extrapolate_limit: tables must share species, order and grid");
    }
    t.push_back(tab.t);
    v.push_back(tab.values);
  }
  Extrapolation e = extrapolate_limit(t, v);
  TableExtrapolation out;
  out.limit = tables.back();
  out.limit.t = std::numeric_limits<double>::infinity();
  out.limit.values = std::move(e.limit);
  out.cauchy_residual = e.cauchy_residual;
  out.nonconvergent = std::move(e.nonconvergent);
  return out;
}

std::string to_string(ScatterMode m) { return m == ScatterMode::linear ? "linear" : "modified"; }

ScatterMode scatter_mode_from_string(const std::string& tag) {
  if (tag == "linear") return ScatterMode::linear;
  if (tag == "modified") return ScatterMode::modified;
  throw std::invalid_argument("unknown scatter mode '" + tag + "' (expected linear|modified)");
}

namespace {

struct KernelEstimate {
  double value = 0.0;
  double square_sum = 0.0;
};

KernelEstimate phase_space_kde(const SpeciesParticles& sp, const Vec3& X, const Vec3& V, double hx, double hv) {
  KernelEstimate r;
  const auto Xs = sp.positions();
  const auto Vs = sp.velocities();
  const auto w = sp.weights();
  const double norm6 = 1.0 / (hx * hx * hx * hv * hv * hv);
  for (std::size_t j = 0; j < Xs.size(); ++j) {
    double k = norm6 * w[j];
    for (int a = 0; a < 3 && k != 0.0; ++a) {
      k *= kde_kernel((X[a] - Xs[j][a]) / hx) * kde_kernel((V[a] - Vs[j][a]) / hv);
    }
    r.value += k;
    r.square_sum += k * k;
  }
  return r;
}

}  // namespace

ScatteringRow scattering_defect(const Snapshot& s1, const Snapshot& s2, const ScatterConfig& cfg,
                                const LimitProfile* e0) {
  if (!(cfg.hx > 0.0) || !(cfg.hv > 0.0)) throw std::invalid_argument("scattering_defect: bandwidths must be > 0");
  if (cfg.max_probes == 0) throw std::invalid_argument("scattering_defect: max_probes must be > 0");
  if (cfg.mode == ScatterMode::modified && e0 == nullptr) {
    throw std::invalid_argument("scattering_defect: modified mode requires the limit field E0");
  }
  if (s1.ensemble().size() != s2.ensemble().size()) throw std::invalid_argument("scattering_defect: species differ");
  if (!(s1.time() > 0.0) || !(s2.time() > s1.time())) throw std::invalid_argument("scattering_defect: need 0 < t1 < t2");
  ScatteringRow row;
  row.t1 = s1.time();
  row.t2 = s2.time();
  const double l1 = std::log(row.t1);
  const double l2 = std::log(row.t2);
  for (std::size_t a = 0; a < s1.ensemble().size(); ++a) {
    const auto& p1 = s1.ensemble()[a];
    const auto& p2 = s2.ensemble()[a];
    if (p1.size() == 0) continue;
    const double qm = p1.species().charge_to_mass();
    const std::size_t stride = std::max<std::size_t>(1, p1.size() / cfg.max_probes);
    for (std::size_t j = 0; j < p1.size(); j += stride) {
      const Vec3 X = p1.positions()[j];
      const Vec3 V = p1.velocities()[j];
      Vec3 X1 = X, X2 = X;
      if (cfg.mode == ScatterMode::modified) {
        const Vec3 e = e0->vector_at(V);
        X1 = X + (qm * l1) * e;
        X2 = X + (qm * l2) * e;
      }
      const KernelEstimate g1 = phase_space_kde(p1, X1, V, cfg.hx, cfg.hv);
      const KernelEstimate g2 = phase_space_kde(p2, X2, V, cfg.hx, cfg.hv);
      row.defect = std::max(row.defect, std::abs(g2.value - g1.value));
      row.noise_floor = std::max(row.noise_floor, std::sqrt(g1.square_sum + g2.square_sum));
    }
  }
  row.inconclusive = row.defect < 3.0 * row.noise_floor;
  return row;
}

}  // namespace vpdecay
