#include "vpdecay/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "vpdecay/quadrature.hpp"

namespace vpdecay {

// ---------------------------------------------------------------- Polynomial1D

Polynomial1D::Polynomial1D(std::vector<double> coefficients) : c_(std::move(coefficients)) { trim(); }

void Polynomial1D::trim() {
  while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

double Polynomial1D::operator()(double u) const {
  double r = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * u + *it;
  return r;
}

Polynomial1D Polynomial1D::derivative() const {
  if (c_.size() <= 1) return {};
  std::vector<double> d(c_.size() - 1);
  for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
  return Polynomial1D(std::move(d));
}

Polynomial1D operator*(const Polynomial1D& a, const Polynomial1D& b) {
  if (a.c_.empty() || b.c_.empty()) return {};
  std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i) {
    for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
  }
  return Polynomial1D(std::move(r));
}

Polynomial1D operator+(const Polynomial1D& a, const Polynomial1D& b) {
  std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i) r[i] += a.c_[i];
  for (std::size_t i = 0; i < b.c_.size(); ++i) r[i] += b.c_[i];
  return Polynomial1D(std::move(r));
}

Polynomial1D operator*(double s, const Polynomial1D& a) {
  std::vector<double> r = a.c_;
  for (double& c : r) c *= s;
  return Polynomial1D(std::move(r));
}

Polynomial1D gegenbauer(int k, double p) {
  if (k < 0) throw std::invalid_argument("gegenbauer: degree must be >= 0");
  if (!(p > -0.5)) throw std::invalid_argument("gegenbauer: parameter must exceed -1/2");
  Polynomial1D prev({1.0});
  if (k == 0) return prev;
  Polynomial1D cur({0.0, 2.0 * p});
  const Polynomial1D u({0.0, 1.0});
  for (int n = 2; n <= k; ++n) {
    Polynomial1D next = (2.0 * (n + p - 1.0) / n) * (u * cur) + (-(n + 2.0 * p - 2.0) / n) * prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

// ------------------------------------------------------------------- Profile1D

double Profile1D::moment(int k) const {
  const auto [a, b] = support();
  auto f = [this, k](double u) { return std::pow(u, k) * derivative(u, 0); };
  return integrate_adaptive(f, a, b, 1e-15).value;
}

// ---------------------------------------------------- WeightedPolynomialProfile

double WeightedPolynomialProfile::moment(int k) const {
  const double L = half_width_;
  auto f = [&](double theta) {
    const double u = center_ + L * std::sin(theta);
    return std::pow(u, k) * derivative(u, 0) * L * std::cos(theta);
  };
  return integrate_gauss(f, -0.5 * std::numbers::pi, 0.5 * std::numbers::pi, 64);
}

namespace {
constexpr int kMaxDerivative = 10;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}
}  // namespace

WeightedPolynomialProfile::WeightedPolynomialProfile(double exponent, Polynomial1D poly, double amplitude,
                                                     double center, double half_width)
    : s_(exponent), poly_(std::move(poly)), amplitude_(amplitude), center_(center), half_width_(half_width) {
  if (!(exponent >= 0.0)) throw std::invalid_argument("weighted profile: exponent must be >= 0");
  if (!(half_width > 0.0)) throw std::invalid_argument("weighted profile: half width must be > 0");
  const Polynomial1D one_minus_z2({1.0, 0.0, -1.0});
  const Polynomial1D z({0.0, 1.0});
  weight_derivs_.push_back(Polynomial1D({1.0}));
  for (int j = 0; j < kMaxDerivative; ++j) {
    const Polynomial1D& q = weight_derivs_.back();
    weight_derivs_.push_back(one_minus_z2 * q.derivative() + (-2.0 * (s_ - j)) * (z * q));
  }
  poly_derivs_.push_back(poly_);
  for (int j = 0; j < kMaxDerivative; ++j) poly_derivs_.push_back(poly_derivs_.back().derivative());
}

double WeightedPolynomialProfile::derivative(double u, int order) const {
  if (order < 0 || order > kMaxDerivative) {
    throw std::invalid_argument("weighted profile: derivative order out of range");
  }
  const double z = (u - center_) / half_width_;
  if (!(std::abs(z) < 1.0)) return 0.0;
  const double base = 1.0 - z * z;
  double sum = 0.0;
  for (int j = 0; j <= order; ++j) {
    const double wj = std::pow(base, s_ - j) * weight_derivs_[j](z);
    sum += binomial(order, j) * wj * poly_derivs_[order - j](z);
  }
  return amplitude_ * sum / std::pow(half_width_, order);
}

int WeightedPolynomialProfile::smoothness() const {
  return static_cast<int>(std::ceil(s_)) - 1;
}

std::string WeightedPolynomialProfile::describe() const {
  std::ostringstream os;
  os << amplitude_ << "*(1-z^2)^" << s_ << "*P_deg" << poly_.degree() << " on [" << support().first << ","
     << support().second << "]";
  return os.str();
}

std::shared_ptr<WeightedPolynomialProfile> WeightedPolynomialProfile::scaled(double factor) const {
  auto p = std::make_shared<WeightedPolynomialProfile>(s_, poly_, amplitude_ * factor, center_, half_width_);
  p->set_matched_moments(matched_moments());
  return p;
}

std::shared_ptr<WeightedPolynomialProfile> WeightedPolynomialProfile::shifted(double shift) const {
  return std::make_shared<WeightedPolynomialProfile>(s_, poly_, amplitude_, center_ + shift, half_width_);
}

// ----------------------------------------------------- TruncatedGaussianProfile

TruncatedGaussianProfile::TruncatedGaussianProfile(double mean, double sigma, double mass)
    : mean_(mean), sigma_(sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian profile: sigma must be > 0");
  const double truncated = std::erf(kCutoff / std::numbers::sqrt2);
  amplitude_ = mass / (sigma * std::sqrt(2.0 * std::numbers::pi) * truncated);
  set_matched_moments({mass, mass * mean});
}

double TruncatedGaussianProfile::derivative(double u, int order) const {
  if (order < 0) throw std::invalid_argument("gaussian profile: negative derivative order");
  const double z = (u - mean_) / sigma_;
  if (!(std::abs(z) <= kCutoff)) return 0.0;
  // probabilists' Hermite polynomials
  double he_prev = 1.0;
  double he = (order == 0) ? 1.0 : z;
  for (int n = 1; n < order; ++n) {
    const double next = z * he - n * he_prev;
    he_prev = he;
    he = next;
  }
  const double sign = (order % 2 == 0) ? 1.0 : -1.0;
  return amplitude_ * sign * he * std::exp(-0.5 * z * z) / std::pow(sigma_, order);
}

std::pair<double, double> TruncatedGaussianProfile::support() const {
  return {mean_ - kCutoff * sigma_, mean_ + kCutoff * sigma_};
}

std::string TruncatedGaussianProfile::describe() const {
  std::ostringstream os;
  os << "gauss(mean=" << mean_ << ",sigma=" << sigma_ << ")";
  return os.str();
}

double TruncatedGaussianProfile::moment(int k) const {
  if (k == 0) return matched_moments()[0];
  if (k == 1) return matched_moments()[1];
  return Profile1D::moment(k);
}

// ------------------------------------------------------------------- Profile3D

Profile3D Profile3D::tensor(ProfilePtr a1, ProfilePtr a2, ProfilePtr a3, double coefficient) {
  return Profile3D({SeparableTerm{coefficient, {std::move(a1), std::move(a2), std::move(a3)}}});
}

double Profile3D::operator()(const Vec3& x) const {
  double s = 0.0;
  for (const auto& t : terms_) s += t.coefficient * (*t.factors[0])(x[0]) * (*t.factors[1])(x[1]) * (*t.factors[2])(x[2]);
  return s;
}

double Profile3D::derivative(const Vec3& x, const MultiIndex& beta) const {
  double s = 0.0;
  for (const auto& t : terms_) {
    double p = t.coefficient;
    for (int a = 0; a < 3; ++a) p *= t.factors[a]->derivative(x[a], beta[a]);
    s += p;
  }
  return s;
}

double Profile3D::moment(const MultiIndex& beta) const {
  double s = 0.0;
  for (const auto& t : terms_) {
    double p = t.coefficient;
    for (int a = 0; a < 3; ++a) p *= t.factors[a]->moment(beta[a]);
    s += p;
  }
  return s;
}

std::pair<Vec3, Vec3> Profile3D::support_box() const {
  if (terms_.empty()) throw std::logic_error("support_box of an empty profile");
  Vec3 lo{1e300, 1e300, 1e300};
  Vec3 hi{-1e300, -1e300, -1e300};
  for (const auto& t : terms_) {
    for (int a = 0; a < 3; ++a) {
      const auto [l, h] = t.factors[a]->support();
      lo[a] = std::min(lo[a], l);
      hi[a] = std::max(hi[a], h);
    }
  }
  return {lo, hi};
}

Profile3D Profile3D::operator+(const Profile3D& other) const {
  std::vector<SeparableTerm> t = terms_;
  t.insert(t.end(), other.terms_.begin(), other.terms_.end());
  return Profile3D(std::move(t));
}

Profile3D Profile3D::scaled(double factor) const {
  std::vector<SeparableTerm> t = terms_;
  for (auto& term : t) term.coefficient *= factor;
  return Profile3D(std::move(t));
}

// ----------------------------------------------------------- PhaseSpaceDensity

PhaseSpaceDensity PhaseSpaceDensity::product(const Profile3D& phi, const Profile3D& psi) {
  std::vector<PhaseTerm> terms;
  for (const auto& a : phi.terms()) {
    for (const auto& b : psi.terms()) {
      terms.push_back(PhaseTerm{a.coefficient * b.coefficient, a.factors, b.factors});
    }
  }
  return PhaseSpaceDensity(std::move(terms));
}

double PhaseSpaceDensity::operator()(const Vec3& x, const Vec3& v) const {
  double s = 0.0;
  for (const auto& t : terms_) {
    double p = t.coefficient;
    for (int a = 0; a < 3; ++a) p *= (*t.x_factors[a])(x[a]) * (*t.v_factors[a])(v[a]);
    s += p;
  }
  return s;
}

PhaseSpaceDensity PhaseSpaceDensity::operator+(const PhaseSpaceDensity& other) const {
  std::vector<PhaseTerm> t = terms_;
  t.insert(t.end(), other.terms_.begin(), other.terms_.end());
  return PhaseSpaceDensity(std::move(t));
}

PhaseSpaceDensity PhaseSpaceDensity::scaled(double factor) const {
  std::vector<PhaseTerm> t = terms_;
  for (auto& term : t) term.coefficient *= factor;
  return PhaseSpaceDensity(std::move(t));
}

namespace {
std::pair<Vec3, Vec3> factor_box(const std::vector<PhaseTerm>& terms, bool velocity) {
  if (terms.empty()) throw std::logic_error("support box of an empty density");
  Vec3 lo{1e300, 1e300, 1e300};
  Vec3 hi{-1e300, -1e300, -1e300};
  for (const auto& t : terms) {
    const auto& f = velocity ? t.v_factors : t.x_factors;
    for (int a = 0; a < 3; ++a) {
      const auto [l, h] = f[a]->support();
      lo[a] = std::min(lo[a], l);
      hi[a] = std::max(hi[a], h);
    }
  }
  return {lo, hi};
}
}  // namespace

std::pair<Vec3, Vec3> PhaseSpaceDensity::x_box() const { return factor_box(terms_, false); }
std::pair<Vec3, Vec3> PhaseSpaceDensity::v_box() const { return factor_box(terms_, true); }

double PhaseSpaceDensity::mass() const {
  double s = 0.0;
  for (const auto& t : terms_) {
    double p = t.coefficient;
    for (int a = 0; a < 3; ++a) p *= t.x_factors[a]->moment(0) * t.v_factors[a]->moment(0);
    s += p;
  }
  return s;
}

PhaseSpaceDensity net_charge_density(const std::vector<double>& charges,
                                     const std::vector<PhaseSpaceDensity>& f0) {
  if (charges.size() != f0.size()) throw std::invalid_argument("net_charge_density: size mismatch");
  using Key = std::array<const Profile1D*, 6>;
  std::vector<PhaseTerm> merged;
  std::map<Key, std::size_t> slot;
  for (std::size_t s = 0; s < f0.size(); ++s) {
    for (const auto& t : f0[s].terms()) {
      Key k{t.x_factors[0].get(), t.x_factors[1].get(), t.x_factors[2].get(),
            t.v_factors[0].get(), t.v_factors[1].get(), t.v_factors[2].get()};
      auto it = slot.find(k);
      if (it == slot.end()) {
        slot.emplace(k, merged.size());
        PhaseTerm nt = t;
        nt.coefficient = charges[s] * t.coefficient;
        merged.push_back(std::move(nt));
      } else {
        merged[it->second].coefficient += charges[s] * t.coefficient;
      }
    }
  }
  std::vector<PhaseTerm> kept;
  for (auto& t : merged) {
    if (t.coefficient != 0.0) kept.push_back(std::move(t));
  }
  return PhaseSpaceDensity(std::move(kept));
}

}  // namespace vpdecay
