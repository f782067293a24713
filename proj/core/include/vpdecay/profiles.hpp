#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vpdecay/multi_index.hpp"
#include "vpdecay/vec3.hpp"

namespace vpdecay {

/// Real polynomial stored by ascending degree. The trailing coefficient is
/// nonzero unless the polynomial is zero (empty coefficient list).
class Polynomial1D {
 public:
  Polynomial1D() = default;
  explicit Polynomial1D(std::vector<double> coefficients);

  const std::vector<double>& coefficients() const { return c_; }
  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  double operator()(double u) const;
  Polynomial1D derivative() const;

  friend Polynomial1D operator*(const Polynomial1D& a, const Polynomial1D& b);
  friend Polynomial1D operator+(const Polynomial1D& a, const Polynomial1D& b);
  friend Polynomial1D operator*(double s, const Polynomial1D& a);

 private:
  void trim();
  std::vector<double> c_;
};

/// Gegenbauer polynomial C^p_k by the three-term recurrence
/// n C_n = 2 u (n + p - 1) C_{n-1} - (n + 2p - 2) C_{n-2}.
/// Requires p > -1/2 and k >= 0.
Polynomial1D gegenbauer(int k, double p);

/// Compactly supported real function of one variable with derivatives.
class Profile1D {
 public:
  virtual ~Profile1D() = default;

  /// d^order/du^order of the profile at u; zero outside the support.
  virtual double derivative(double u, int order) const = 0;
  double operator()(double u) const { return derivative(u, 0); }

  /// Closed support interval [a, b].
  virtual std::pair<double, double> support() const = 0;
  /// Number of continuous derivatives across the support boundary.
  virtual int smoothness() const = 0;
  virtual std::string describe() const = 0;

  /// Integral of u^k times the profile, by adaptive quadrature unless a
  /// subclass knows it in closed form.
  virtual double moment(int k) const;

  /// Moments 0..K that a discretization must reproduce exactly (empty when
  /// the profile carries no moment constraint). Used by the particle sampler.
  const std::vector<double>& matched_moments() const { return matched_; }
  void set_matched_moments(std::vector<double> m) { matched_ = std::move(m); }

 private:
  std::vector<double> matched_;
};

using ProfilePtr = std::shared_ptr<const Profile1D>;

/// amplitude * (1 - z^2)^s * P(z) for |z| < 1, z = (u - center) / half_width;
/// zero elsewhere. Covers the Gegenbauer-weighted profiles and all bumps.
class WeightedPolynomialProfile final : public Profile1D {
 public:
  WeightedPolynomialProfile(double exponent, Polynomial1D poly, double amplitude = 1.0,
                            double center = 0.0, double half_width = 1.0);

  double derivative(double u, int order) const override;
  std::pair<double, double> support() const override { return {center_ - half_width_, center_ + half_width_}; }
  int smoothness() const override;
  std::string describe() const override;
  /// 64-point Gauss-Legendre in theta with u = center + L sin(theta), where
  /// the weight (1 - z^2)^s becomes smooth for any s >= 0.
  double moment(int k) const override;

  double exponent() const { return s_; }
  double amplitude() const { return amplitude_; }
  double center() const { return center_; }
  double half_width() const { return half_width_; }
  const Polynomial1D& polynomial() const { return poly_; }

  /// Same shape with the amplitude multiplied by factor.
  std::shared_ptr<WeightedPolynomialProfile> scaled(double factor) const;
  /// Same shape translated by shift.
  std::shared_ptr<WeightedPolynomialProfile> shifted(double shift) const;

 private:
  double s_;
  Polynomial1D poly_;
  double amplitude_;
  double center_;
  double half_width_;
  // weight_derivs_[j] = Q_j with d^j/dz^j (1-z^2)^s = (1-z^2)^{s-j} Q_j(z)
  std::vector<Polynomial1D> weight_derivs_;
  std::vector<Polynomial1D> poly_derivs_;
};

/// Gaussian of mean mu and width sigma truncated at |u - mu| = 6 sigma and
/// renormalized so the truncated integral is exactly `mass`.
class TruncatedGaussianProfile final : public Profile1D {
 public:
  static constexpr double kCutoff = 6.0;

  TruncatedGaussianProfile(double mean, double sigma, double mass = 1.0);

  double derivative(double u, int order) const override;
  std::pair<double, double> support() const override;
  int smoothness() const override { return 0; }
  std::string describe() const override;
  double moment(int k) const override;

  double mean() const { return mean_; }
  double sigma() const { return sigma_; }

 private:
  double mean_;
  double sigma_;
  double amplitude_;
};

/// Sum of separable terms c * a1(x1) a2(x2) a3(x3).
struct SeparableTerm {
  double coefficient = 1.0;
  std::array<ProfilePtr, 3> factors;
};

class Profile3D {
 public:
  Profile3D() = default;
  explicit Profile3D(std::vector<SeparableTerm> terms) : terms_(std::move(terms)) {}
  static Profile3D tensor(ProfilePtr a1, ProfilePtr a2, ProfilePtr a3, double coefficient = 1.0);

  const std::vector<SeparableTerm>& terms() const { return terms_; }
  double operator()(const Vec3& x) const;
  /// D^beta at x.
  double derivative(const Vec3& x, const MultiIndex& beta) const;
  /// Integral of x^beta times the profile, from the 1D factor moments.
  double moment(const MultiIndex& beta) const;
  /// Bounding box of the union of term supports.
  std::pair<Vec3, Vec3> support_box() const;

  Profile3D operator+(const Profile3D& other) const;
  Profile3D scaled(double factor) const;

 private:
  std::vector<SeparableTerm> terms_;
};

/// Phase-space term c * prod_i a_i(x_i) * prod_i b_i(v_i).
struct PhaseTerm {
  double coefficient = 1.0;
  std::array<ProfilePtr, 3> x_factors;
  std::array<ProfilePtr, 3> v_factors;
};

/// Analytic initial distribution f0(x, v) of one species: a sum of separable
/// phase-space terms.
class PhaseSpaceDensity {
 public:
  PhaseSpaceDensity() = default;
  explicit PhaseSpaceDensity(std::vector<PhaseTerm> terms) : terms_(std::move(terms)) {}
  /// phi(x) psi(v), expanded into terms.
  static PhaseSpaceDensity product(const Profile3D& phi, const Profile3D& psi);

  const std::vector<PhaseTerm>& terms() const { return terms_; }
  double operator()(const Vec3& x, const Vec3& v) const;
  PhaseSpaceDensity operator+(const PhaseSpaceDensity& other) const;
  PhaseSpaceDensity scaled(double factor) const;
  /// Support box in x and in v.
  std::pair<Vec3, Vec3> x_box() const;
  std::pair<Vec3, Vec3> v_box() const;
  /// Integral of f0 over phase space.
  double mass() const;

 private:
  std::vector<PhaseTerm> terms_;
};

/// Charge-weighted sum over species of the phase-space terms, with terms that
/// share identical factor objects merged and exact zeros dropped. This is the
/// algebraic form of sum_alpha q_alpha f0^alpha used by the free-streaming
/// oracle and the analytic limit profiles.
PhaseSpaceDensity net_charge_density(const std::vector<double>& charges,
                                     const std::vector<PhaseSpaceDensity>& f0);

}  // namespace vpdecay
