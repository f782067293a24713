#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vpdecay/profiles.hpp"
#include "vpdecay/types.hpp"

namespace vpdecay {

enum class Preset {
  gegenbauer,       ///< moment-cancelling neutral pair of order m
  gaussian_dipole,  ///< two Gaussian clouds sharing a zero-mean velocity profile
  exact_overlap,    ///< gaussian_dipole with identical means and widths
  single_species,   ///< one positive species, bump in x and v (non-neutral)
};

std::string to_string(Preset p);
/// Throws std::invalid_argument on an unknown tag.
Preset preset_from_string(const std::string& tag);

struct GaussianDipoleParams {
  Vec3 mean_plus{0.0, 0.0, 0.0};
  Vec3 mean_minus{0.0, 0.0, 0.0};
  double sigma_plus = 0.35;
  double sigma_minus = 0.5;
};

struct InitialDataSpec {
  int m = 0;                   ///< target decay order
  double p_geg = 3.0;          ///< Gegenbauer parameter, must exceed m + 2
  double support_scale = 1.0;  ///< half width of the unit profiles
  Vec3 center{0.0, 0.0, 0.0};  ///< translation of every spatial profile
  double amplitude = 1.0;      ///< overall factor on every f0
  std::vector<Species> species = neutral_pair();
  int nx = 8;  ///< Gauss-Legendre nodes per spatial axis
  int nv = 8;  ///< Gauss-Legendre nodes per velocity axis
  Preset preset = Preset::gegenbauer;
  GaussianDipoleParams dipole{};

  /// Spec with the documented defaults for order m (p_geg = m + 3).
  static InitialDataSpec for_order(int m, Preset preset = Preset::gegenbauer);
  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const;
};

/// Phi_m(u) = (1 - u^2)^{p - 1/2} C^p_m(u) on [-1, 1], normalized so that
/// the m-th moment is 1 (64-point Gauss-Legendre). Lower moments vanish by
/// orthogonality. Throws std::domain_error if the normalizing integral is
/// below 1e-14 in magnitude.
std::shared_ptr<WeightedPolynomialProfile> weighted_phi(int m, double p_geg);

/// c (1 - u^2)^{k+1} on [-1, 1] with unit integral; C^k smooth.
std::shared_ptr<WeightedPolynomialProfile> bump(int smoothness);

/// mu_m(x) = Phi_m(x1) Psi(x2) Psi(x3), shifted by spec.center and scaled
/// by spec.support_scale. Requires spec.m >= 1.
Profile3D mu_m(const InitialDataSpec& spec);

/// The nonzero, zero-integral velocity profile eta used for m = 0.
Profile3D eta_profile();

/// Dominating bump c * prod_i (1 - (u_i - c_i)^2 / L^2)^{exponent} with
/// per-axis constants chosen so that it is >= 1.05 |target| pointwise.
Profile3D dominating_bump(const Profile3D& target, int exponent, double support_half_width);

/// Per-species spatial and velocity profiles, f0^alpha = phi^alpha(x) psi^alpha(v).
struct SpeciesProfiles {
  std::vector<Profile3D> phi;
  std::vector<Profile3D> psi;
};

/// Neutral-pair splitting of the moment-cancelling construction.
/// m >= 1: phi+ = mu_m + B, phi- = B, psi = b(v1) b(v2) b(v3).
/// m = 0: phi = normalized bump, psi+ = eta + B_v, psi- = B_v.
/// Throws std::logic_error if a profile is negative at a test node.
SpeciesProfiles species_profiles(const InitialDataSpec& spec);

/// Per-species analytic distributions together with the species list.
struct InitialData {
  std::vector<Species> species;
  std::vector<PhaseSpaceDensity> f0;

  std::vector<double> charges() const;
  /// Charge-weighted net density sum_alpha q_alpha f0^alpha.
  PhaseSpaceDensity net() const { return net_charge_density(charges(), f0); }
};

/// Two species q = +-1 with spatial Gaussians G+- and a zero-integral velocity
/// profile phi = phi_a - phi_b split into nonnegative parts:
/// f+ = G+ phi_a + G- phi_b, f- = G+ phi_b + G- phi_a, so that
/// f+ - f- = (G+ - G-) phi.
InitialData gaussian_dipole(const GaussianDipoleParams& params, const Profile3D& velocity_profile,
                            double amplitude = 1.0);

/// Analytic f0 for any preset.
InitialData build_initial_data(const InitialDataSpec& spec);

/// Tensor Gauss-Legendre particles over the common support box of all
/// species; weight = f0(node) times the product of Gauss weights. One-
/// dimensional factor values are rescaled to reproduce each factor's matched
/// moments exactly. Nodes with weight < 1e-16 of the species maximum are
/// dropped. Throws std::invalid_argument if a support box is not finite or
/// the grid is too coarse for the matched moments to keep every weight
/// nonnegative.
ParticleEnsemble sample(const InitialData& data, int nx, int nv);

/// build_initial_data + sample.
ParticleEnsemble construct_ensemble(const InitialDataSpec& spec);

/// Gauss-Legendre moments of the net spatial charge profile
/// integral x^beta sum_alpha q_alpha f0^alpha dx dv, computed from the
/// analytic terms (64 nodes per axis).
double net_spatial_moment(const InitialData& data, const MultiIndex& beta);

/// Mean node spacing of the sampling lattice in x and in v (box length / n).
struct LatticeSpacing {
  double dx = 0.0;
  double dv = 0.0;
};
LatticeSpacing lattice_spacing(const InitialData& data, int nx, int nv);

}  // namespace vpdecay
