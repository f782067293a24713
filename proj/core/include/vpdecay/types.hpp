#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vpdecay/vec3.hpp"

namespace vpdecay {

/// One particle species: charge q (signed) and mass m > 0.
struct Species {
  int id = 0;
  double charge = 1.0;
  double mass = 1.0;

  /// q / m, the coupling of the species to the field.
  double charge_to_mass() const { return charge / mass; }
};

/// Throws std::invalid_argument if the list is empty or a mass is not positive.
void validate_species(std::span<const Species> species);

/// Two species, q = +1 and q = -1, unit masses.
std::vector<Species> neutral_pair();

/// Phase-space nodes of one species in the free-streaming frame:
/// g-frame position X, velocity V and weight w (distribution value times
/// quadrature volume). Weights are shared and never modified.
class SpeciesParticles {
 public:
  SpeciesParticles() = default;
  SpeciesParticles(Species species, std::vector<Vec3> positions, std::vector<Vec3> velocities,
                   std::vector<double> weights);
  SpeciesParticles(Species species, std::vector<Vec3> positions, std::vector<Vec3> velocities,
                   std::shared_ptr<const std::vector<double>> weights);

  const Species& species() const { return species_; }
  std::size_t size() const { return positions_.size(); }
  std::span<const Vec3> positions() const { return positions_; }
  std::span<const Vec3> velocities() const { return velocities_; }
  std::span<const double> weights() const { return *weights_; }
  const std::shared_ptr<const std::vector<double>>& shared_weights() const { return weights_; }

  /// Sum of weights: the species number (integral of f).
  double number() const;

 private:
  Species species_;
  std::vector<Vec3> positions_;
  std::vector<Vec3> velocities_;
  std::shared_ptr<const std::vector<double>> weights_ = std::make_shared<const std::vector<double>>();
};

using ParticleEnsemble = std::vector<SpeciesParticles>;

std::size_t particle_count(const ParticleEnsemble& e);

/// Net charge: sum over species of q times the species number.
double total_charge(const ParticleEnsemble& e);

/// Sum over species of m * sum_j w_j V_j.
Vec3 total_momentum(const ParticleEnsemble& e);

/// Sum over species of m * sum_j w_j |V_j|, the scale for relative momentum drift.
double momentum_scale(const ParticleEnsemble& e);

/// State at time t. The ensemble holds g-frame coordinates; the physical
/// positions are cached as fl(X + V t), which is the frame map by definition.
class Snapshot {
 public:
  Snapshot() = default;
  /// Builds from g-frame coordinates.
  static Snapshot from_g_frame(double t, ParticleEnsemble ensemble);
  /// Builds from an ensemble whose positions are physical x; X = x - V t.
  static Snapshot from_physical(double t, const ParticleEnsemble& physical);

  double time() const { return t_; }
  const ParticleEnsemble& ensemble() const { return ensemble_; }
  std::span<const Vec3> physical_positions(std::size_t species_index) const {
    return physical_[species_index];
  }

 private:
  double t_ = 0.0;
  ParticleEnsemble ensemble_;
  std::vector<std::vector<Vec3>> physical_;
};

/// Uniform node list lo, lo + h, ..., hi with n >= 2 nodes.
struct Axis {
  double lo = -1.0;
  double hi = 1.0;
  int n = 2;

  double spacing() const { return (hi - lo) / (n - 1); }
  double node(int i) const { return lo + i * spacing(); }
};

/// Tensor grid of three uniform axes, row-major with the last axis fastest.
struct Grid3 {
  std::array<Axis, 3> axes{};

  static Grid3 cube(double lo, double hi, int n);
  static Grid3 box(const Vec3& lo, const Vec3& hi, int n);

  std::size_t size() const {
    return static_cast<std::size_t>(axes[0].n) * axes[1].n * axes[2].n;
  }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * axes[1].n + j) * axes[2].n + k;
  }
  Vec3 node(int i, int j, int k) const { return {axes[0].node(i), axes[1].node(j), axes[2].node(k)}; }
  Vec3 node(std::size_t flat) const;
  double cell_volume() const { return axes[0].spacing() * axes[1].spacing() * axes[2].spacing(); }
  /// Throws std::invalid_argument unless every axis has n >= 2 and lo < hi.
  void validate() const;
};

using XGrid = Grid3;
using VGrid = Grid3;

/// Non-fatal diagnostics (e.g. a sup-norm maximizer on the probe boundary)
/// go through this hook; the default handler prints to stderr.
using WarningHandler = std::function<void(const std::string&)>;
void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

/// Worker count used by parallel loops (default 1).
void set_thread_count(int n);
int thread_count();

/// Runs fn(begin, end) over contiguous chunks covering [0, n). Each index is
/// processed exactly once, so per-index results do not depend on the thread
/// count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace vpdecay
