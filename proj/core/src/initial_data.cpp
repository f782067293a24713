#include "vpdecay/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "vpdecay/quadrature.hpp"

namespace vpdecay {

std::string to_string(Preset p) {
  switch (p) {
    case Preset::gegenbauer:
      return "gegenbauer";
    case Preset::gaussian_dipole:
      return "gaussian_dipole";
    case Preset::exact_overlap:
      return "exact_overlap";
    case Preset::single_species:
      return "single_species";
  }
  return "unknown";
}

Preset preset_from_string(const std::string& tag) {
  if (tag == "gegenbauer") return Preset::gegenbauer;
  if (tag == "gaussian_dipole") return Preset::gaussian_dipole;
  if (tag == "exact_overlap") return Preset::exact_overlap;
  if (tag == "single_species") return Preset::single_species;
  throw std::invalid_argument("unknown preset '" + tag +
                              "' (expected gegenbauer|gaussian_dipole|exact_overlap|single_species)");
}

InitialDataSpec InitialDataSpec::for_order(int m, Preset preset) {
  InitialDataSpec s;
  s.m = m;
  s.p_geg = m + 3.0;
  s.preset = preset;
  if (preset == Preset::single_species) s.species = {Species{0, 1.0, 1.0}};
  return s;
}

void InitialDataSpec::validate() const {
  if (m < 0) throw std::invalid_argument("m: constraint m >= 0 violated");
  if (!(p_geg > m + 2.0)) throw std::invalid_argument("p_geg: constraint p_geg > m + 2 violated");
  if (nx < 8 || nv < 8) throw std::invalid_argument("resolution: at least 8 nodes per axis required");
  if (!(support_scale > 0.0)) throw std::invalid_argument("support_scale: must be > 0");
  if (!(amplitude > 0.0)) throw std::invalid_argument("amplitude: must be > 0");
  validate_species(species);
  if (preset == Preset::single_species) {
    if (species.size() != 1) throw std::invalid_argument("species: single_species preset needs one species");
  } else if (species.size() != 2 || !(species[0].charge > 0.0) || !(species[1].charge < 0.0)) {
    throw std::invalid_argument("species: neutral presets need two species with q0 > 0 > q1");
  }
  if (preset == Preset::gaussian_dipole || preset == Preset::exact_overlap) {
    if (!(dipole.sigma_plus > 0.0) || !(dipole.sigma_minus > 0.0)) {
      throw std::invalid_argument("dipole: sigma must be > 0");
    }
  }
}

// --------------------------------------------------------------- 1D profiles

std::shared_ptr<WeightedPolynomialProfile> weighted_phi(int m, double p_geg) {
  if (m < 0) throw std::invalid_argument("weighted_phi: m must be >= 0");
  if (!(p_geg > m + 2.0)) throw std::invalid_argument("weighted_phi: p_geg must exceed m + 2");
  WeightedPolynomialProfile raw(p_geg - 0.5, gegenbauer(m, p_geg));
  const double norm = raw.moment(m);
  if (!(std::abs(norm) >= 1e-14)) throw std::domain_error("weighted_phi: degenerate normalizing integral");
  auto phi = raw.scaled(1.0 / norm);
  std::vector<double> target(static_cast<std::size_t>(m) + 1, 0.0);
  target[m] = 1.0;
  phi->set_matched_moments(std::move(target));
  return phi;
}

std::shared_ptr<WeightedPolynomialProfile> bump(int smoothness) {
  if (smoothness < 1) throw std::invalid_argument("bump: smoothness must be >= 1");
  WeightedPolynomialProfile raw(smoothness + 1.0, Polynomial1D({1.0}));
  return raw.scaled(1.0 / raw.moment(0));
}

namespace {

/// Rescales a unit-support profile to half width L around center c while
/// keeping its moment pattern: amplitude / L^{power+1}.
std::shared_ptr<WeightedPolynomialProfile> place(const WeightedPolynomialProfile& unit, double center,
                                                 double half_width, int normalized_power) {
  auto p = std::make_shared<WeightedPolynomialProfile>(
      unit.exponent(), unit.polynomial(), unit.amplitude() / std::pow(half_width, normalized_power + 1), center,
      half_width);
  p->set_matched_moments(unit.matched_moments());
  return p;
}

}  // namespace

Profile3D mu_m(const InitialDataSpec& spec) {
  if (spec.m < 1) throw std::invalid_argument("mu_m: m must be >= 1 (m = 0 uses eta)");
  const double L = spec.support_scale;
  auto phi = weighted_phi(spec.m, spec.p_geg);
  auto psi = bump(spec.m + 1);
  return Profile3D::tensor(place(*phi, spec.center[0], L, spec.m), place(*psi, spec.center[1], L, 0),
                           place(*psi, spec.center[2], L, 0));
}

Profile3D eta_profile() {
  auto odd = weighted_phi(1, 4.0);
  auto even = bump(2);
  return Profile3D::tensor(odd, even, even);
}

Profile3D dominating_bump(const Profile3D& target, int exponent, double support_factor) {
  std::vector<SeparableTerm> terms;
  for (const auto& t : target.terms()) {
    SeparableTerm d;
    d.coefficient = 1.05 * std::abs(t.coefficient);
    for (int a = 0; a < 3; ++a) {
      const auto [lo, hi] = t.factors[a]->support();
      const double c = 0.5 * (lo + hi);
      const double w = 0.5 * (hi - lo);
      const double L = support_factor * w;
      double ratio = 0.0;
      constexpr int kProbe = 4001;
      for (int i = 0; i < kProbe; ++i) {
        const double u = lo + (hi - lo) * i / (kProbe - 1.0);
        const double z = (u - c) / L;
        const double denom = std::pow(1.0 - z * z, exponent);
        ratio = std::max(ratio, std::abs((*t.factors[a])(u)) / denom);
      }
      // grid maximum refined by a small safety factor
      d.factors[a] = std::make_shared<WeightedPolynomialProfile>(static_cast<double>(exponent),
                                                                 Polynomial1D({1.0}), 1.02 * ratio, c, L);
    }
    terms.push_back(std::move(d));
  }
  return Profile3D(std::move(terms));
}

namespace {

constexpr double kDominatingSupport = 1.25;

void require_nonnegative(const Profile3D& p, const char* what) {
  const auto [lo, hi] = p.support_box();
  constexpr int n = 13;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const Vec3 x{lo[0] + (hi[0] - lo[0]) * i / (n - 1.0), lo[1] + (hi[1] - lo[1]) * j / (n - 1.0),
                     lo[2] + (hi[2] - lo[2]) * k / (n - 1.0)};
        if (p(x) < 0.0) throw std::logic_error(std::string("constructed profile is negative: ") + what);
      }
    }
  }
}

Profile3D velocity_bump(int m) {
  auto b = bump(m + 1);
  return Profile3D::tensor(b, b, b);
}

}  // namespace

SpeciesProfiles species_profiles(const InitialDataSpec& spec) {
  spec.validate();
  if (spec.species.size() != 2) throw std::invalid_argument("species_profiles: needs a neutral pair");
  const double q_plus = spec.species[0].charge;
  const double q_minus = spec.species[1].charge;
  SpeciesProfiles out;
  if (spec.m >= 1) {
    const Profile3D mu = mu_m(spec);
    const Profile3D B = dominating_bump(mu, spec.m + 3, kDominatingSupport);
    // q+ phi+ + q- phi- = mu
    out.phi = {(mu + B).scaled(1.0 / q_plus), B.scaled(1.0 / -q_minus)};
    const Profile3D psi = velocity_bump(spec.m);
    out.psi = {psi, psi};
  } else {
    const double L = spec.support_scale;
    auto b = bump(1);
    const Profile3D phi0 = Profile3D::tensor(place(*b, spec.center[0], L, 0), place(*b, spec.center[1], L, 0),
                                             place(*b, spec.center[2], L, 0));
    const Profile3D eta = eta_profile();
    const Profile3D Bv = dominating_bump(eta, 3, kDominatingSupport);
    out.phi = {phi0, phi0};
    out.psi = {(eta + Bv).scaled(1.0 / q_plus), Bv.scaled(1.0 / -q_minus)};
  }
  for (const auto& p : out.phi) require_nonnegative(p, "phi");
  for (const auto& p : out.psi) require_nonnegative(p, "psi");
  return out;
}

std::vector<double> InitialData::charges() const {
  std::vector<double> q;
  q.reserve(species.size());
  for (const auto& s : species) q.push_back(s.charge);
  return q;
}

InitialData gaussian_dipole(const GaussianDipoleParams& params, const Profile3D& velocity_profile,
                            double amplitude) {
  const bool identical = params.mean_plus == params.mean_minus && params.sigma_plus == params.sigma_minus;
  auto gaussian = [](const Vec3& mean, double sigma) {
    return Profile3D::tensor(std::make_shared<TruncatedGaussianProfile>(mean[0], sigma),
                             std::make_shared<TruncatedGaussianProfile>(mean[1], sigma),
                             std::make_shared<TruncatedGaussianProfile>(mean[2], sigma));
  };
  const Profile3D g_plus = gaussian(params.mean_plus, params.sigma_plus);
  const Profile3D g_minus = identical ? g_plus : gaussian(params.mean_minus, params.sigma_minus);
  const Profile3D b = dominating_bump(velocity_profile, 3, kDominatingSupport);
  const Profile3D phi_a = velocity_profile + b;
  const Profile3D& phi_b = b;

  InitialData d;
  d.species = neutral_pair();
  const PhaseSpaceDensity f_plus =
      (PhaseSpaceDensity::product(g_plus, phi_a) + PhaseSpaceDensity::product(g_minus, phi_b)).scaled(amplitude);
  if (identical) {
    d.f0 = {f_plus, f_plus};
  } else {
    const PhaseSpaceDensity f_minus =
        (PhaseSpaceDensity::product(g_plus, phi_b) + PhaseSpaceDensity::product(g_minus, phi_a)).scaled(amplitude);
    d.f0 = {f_plus, f_minus};
  }
  return d;
}

InitialData build_initial_data(const InitialDataSpec& spec) {
  spec.validate();
  switch (spec.preset) {
    case Preset::gegenbauer: {
      const SpeciesProfiles sp = species_profiles(spec);
      InitialData d;
      d.species = spec.species;
      for (std::size_t a = 0; a < 2; ++a) {
        d.f0.push_back(PhaseSpaceDensity::product(sp.phi[a], sp.psi[a]).scaled(spec.amplitude));
      }
      return d;
    }
    case Preset::gaussian_dipole: {
      InitialData d = gaussian_dipole(spec.dipole, eta_profile(), spec.amplitude);
      d.species = spec.species;
      return d;
    }
    case Preset::exact_overlap: {
      GaussianDipoleParams p = spec.dipole;
      p.mean_minus = p.mean_plus;
      p.sigma_minus = p.sigma_plus;
      InitialData d = gaussian_dipole(p, eta_profile(), spec.amplitude);
      d.species = spec.species;
      return d;
    }
    case Preset::single_species: {
      const double L = spec.support_scale;
      auto b = bump(spec.m + 1);
      const Profile3D phi = Profile3D::tensor(place(*b, spec.center[0], L, 0), place(*b, spec.center[1], L, 0),
                                              place(*b, spec.center[2], L, 0));
      InitialData d;
      d.species = spec.species;
      d.f0 = {PhaseSpaceDensity::product(phi, velocity_bump(spec.m)).scaled(spec.amplitude)};
      return d;
    }
  }
  throw std::logic_error("unhandled preset");
}

// ------------------------------------------------------------------ sampling

namespace {

double legendre(int n, double z) {
  double p0 = 1.0;
  if (n == 0) return p0;
  double p1 = z;
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  return p1;
}

std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (a[piv][c] == 0.0) throw std::runtime_error("moment matching: singular system");
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Node values of one factor, multiplicatively corrected so that the discrete
/// moments sum_j W_j y_j u_j^k equal the profile's matched moments.
std::vector<double> factor_values(const Profile1D& p, const GaussRule& rule, double lo, double hi) {
  const std::size_t n = rule.nodes.size();
  std::vector<double> y(n);
  for (std::size_t j = 0; j < n; ++j) y[j] = p(rule.nodes[j]);
  const auto& target = p.matched_moments();
  if (target.empty()) return y;
  const std::size_t K = target.size();
  if (K >= n) throw std::invalid_argument("sample: resolution too low for the matched moments");
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  std::vector<std::vector<double>> M(K, std::vector<double>(K, 0.0));
  std::vector<double> rhs(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) d += rule.weights[j] * y[j] * std::pow(rule.nodes[j], static_cast<int>(k));
    rhs[k] = target[k] - d;
    for (std::size_t i = 0; i < K; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double z = (rule.nodes[j] - c) / h;
        s += rule.weights[j] * y[j] * legendre(static_cast<int>(i), z) * std::pow(rule.nodes[j], static_cast<int>(k));
      }
      M[k][i] = s;
    }
  }
  const std::vector<double> coef = solve_dense(std::move(M), std::move(rhs));
  for (std::size_t j = 0; j < n; ++j) {
    const double z = (rule.nodes[j] - c) / h;
    double corr = 1.0;
    for (std::size_t i = 0; i < K; ++i) corr += coef[i] * legendre(static_cast<int>(i), z);
    y[j] *= corr;
  }
  return y;
}

std::pair<Vec3, Vec3> union_box(const std::pair<Vec3, Vec3>& a, const std::pair<Vec3, Vec3>& b) {
  std::pair<Vec3, Vec3> r = a;
  for (int k = 0; k < 3; ++k) {
    r.first[k] = std::min(a.first[k], b.first[k]);
    r.second[k] = std::max(a.second[k], b.second[k]);
  }
  return r;
}

void require_finite_box(const std::pair<Vec3, Vec3>& box) {
  for (int k = 0; k < 3; ++k) {
    if (!std::isfinite(box.first[k]) || !std::isfinite(box.second[k]) || !(box.first[k] < box.second[k])) {
      throw std::invalid_argument("sample: support box is not finite");
    }
  }
}

}  // namespace

ParticleEnsemble sample(const InitialData& data, int nx, int nv) {
  if (data.species.size() != data.f0.size()) throw std::invalid_argument("sample: species/f0 size mismatch");
  if (nx < 1 || nv < 1) throw std::invalid_argument("sample: resolution must be positive");
  auto xbox = data.f0.front().x_box();
  auto vbox = data.f0.front().v_box();
  for (const auto& f : data.f0) {
    xbox = union_box(xbox, f.x_box());
    vbox = union_box(vbox, f.v_box());
  }
  require_finite_box(xbox);
  require_finite_box(vbox);

  std::array<GaussRule, 6> rules;
  for (int a = 0; a < 3; ++a) {
    rules[a] = gauss_legendre(nx, xbox.first[a], xbox.second[a]);
    rules[3 + a] = gauss_legendre(nv, vbox.first[a], vbox.second[a]);
  }
  // node values per (axis, factor object), shared by all species
  std::array<std::map<const Profile1D*, std::vector<double>>, 6> cache;
  auto values = [&](int axis, const Profile1D& p) -> const std::vector<double>& {
    auto it = cache[axis].find(&p);
    if (it == cache[axis].end()) {
      const double lo = axis < 3 ? xbox.first[axis] : vbox.first[axis - 3];
      const double hi = axis < 3 ? xbox.second[axis] : vbox.second[axis - 3];
      it = cache[axis].emplace(&p, factor_values(p, rules[axis], lo, hi)).first;
    }
    return it->second;
  };

  const std::size_t nx3 = static_cast<std::size_t>(nx) * nx * nx;
  const std::size_t nv3 = static_cast<std::size_t>(nv) * nv * nv;
  std::vector<Vec3> xnodes(nx3), vnodes(nv3);
  std::vector<double> xw(nx3), vw(nv3);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nx; ++j)
      for (int k = 0; k < nx; ++k) {
        const std::size_t f = (static_cast<std::size_t>(i) * nx + j) * nx + k;
        xnodes[f] = {rules[0].nodes[i], rules[1].nodes[j], rules[2].nodes[k]};
        xw[f] = rules[0].weights[i] * rules[1].weights[j] * rules[2].weights[k];
      }
  for (int i = 0; i < nv; ++i)
    for (int j = 0; j < nv; ++j)
      for (int k = 0; k < nv; ++k) {
        const std::size_t f = (static_cast<std::size_t>(i) * nv + j) * nv + k;
        vnodes[f] = {rules[3].nodes[i], rules[4].nodes[j], rules[5].nodes[k]};
        vw[f] = rules[3].weights[i] * rules[4].weights[j] * rules[5].weights[k];
      }

  ParticleEnsemble out;
  for (std::size_t s = 0; s < data.f0.size(); ++s) {
    const auto& terms = data.f0[s].terms();
    std::vector<std::vector<double>> xpart(terms.size(), std::vector<double>(nx3));
    std::vector<std::vector<double>> vpart(terms.size(), std::vector<double>(nv3));
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const auto& a0 = values(0, *terms[t].x_factors[0]);
      const auto& a1 = values(1, *terms[t].x_factors[1]);
      const auto& a2 = values(2, *terms[t].x_factors[2]);
      const auto& b0 = values(3, *terms[t].v_factors[0]);
      const auto& b1 = values(4, *terms[t].v_factors[1]);
      const auto& b2 = values(5, *terms[t].v_factors[2]);
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nx; ++j)
          for (int k = 0; k < nx; ++k) xpart[t][(static_cast<std::size_t>(i) * nx + j) * nx + k] = a0[i] * a1[j] * a2[k];
      for (int i = 0; i < nv; ++i)
        for (int j = 0; j < nv; ++j)
          for (int k = 0; k < nv; ++k) vpart[t][(static_cast<std::size_t>(i) * nv + j) * nv + k] = b0[i] * b1[j] * b2[k];
    }
    std::vector<double> w(nx3 * nv3);
    double wmax = 0.0;
    for (std::size_t ix = 0; ix < nx3; ++ix) {
      for (std::size_t iv = 0; iv < nv3; ++iv) {
        double f = 0.0;
        double mag = 0.0;
        for (std::size_t t = 0; t < terms.size(); ++t) {
          const double ft = terms[t].coefficient * xpart[t][ix] * vpart[t][iv];
          f += ft;
          mag += std::abs(ft);
        }
        // the moment correction can turn edge nodes negative on very coarse grids;
        // a few ulps of cancellation are tolerated
        if (f < -1e-12 * mag) throw std::invalid_argument("sample: resolution too low, negative weight at a node");
        f = std::max(f, 0.0);
        const double wi = f * xw[ix] * vw[iv];
        w[ix * nv3 + iv] = wi;
        wmax = std::max(wmax, wi);
      }
    }
    std::vector<Vec3> X, V;
    std::vector<double> W;
    X.reserve(w.size());
    V.reserve(w.size());
    W.reserve(w.size());
    const double floor = 1e-16 * wmax;
    for (std::size_t ix = 0; ix < nx3; ++ix) {
      for (std::size_t iv = 0; iv < nv3; ++iv) {
        const double wi = w[ix * nv3 + iv];
        if (wi < floor || wi == 0.0) continue;
        X.push_back(xnodes[ix]);
        V.push_back(vnodes[iv]);
        W.push_back(wi);
      }
    }
    out.emplace_back(data.species[s], std::move(X), std::move(V), std::move(W));
  }
  return out;
}

ParticleEnsemble construct_ensemble(const InitialDataSpec& spec) {
  return sample(build_initial_data(spec), spec.nx, spec.nv);
}

double net_spatial_moment(const InitialData& data, const MultiIndex& beta) {
  const PhaseSpaceDensity net = data.net();
  auto gl = [](const Profile1D& p, int k) {
    const auto [a, b] = p.support();
    return integrate_gauss([&](double u) { return std::pow(u, k) * p(u); }, a, b, 64);
  };
  double s = 0.0;
  for (const auto& t : net.terms()) {
    double p = t.coefficient;
    for (int a = 0; a < 3; ++a) p *= gl(*t.x_factors[a], beta[a]) * gl(*t.v_factors[a], 0);
    s += p;
  }
  return s;
}

LatticeSpacing lattice_spacing(const InitialData& data, int nx, int nv) {
  auto xbox = data.f0.front().x_box();
  auto vbox = data.f0.front().v_box();
  for (const auto& f : data.f0) {
    xbox = union_box(xbox, f.x_box());
    vbox = union_box(vbox, f.v_box());
  }
  LatticeSpacing s;
  for (int a = 0; a < 3; ++a) {
    s.dx += (xbox.second[a] - xbox.first[a]) / nx / 3.0;
    s.dv += (vbox.second[a] - vbox.first[a]) / nv / 3.0;
  }
  return s;
}

}  // namespace vpdecay
