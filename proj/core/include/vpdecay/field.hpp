#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vpdecay/types.hpp"

namespace vpdecay {

enum class FieldMethod { direct, tree };

std::string to_string(FieldMethod m);
FieldMethod field_method_from_string(const std::string& tag);

struct FieldConfig {
  /// Plummer softening eps(t) = softening + softening_growth * t. A growth
  /// rate keeps eps comparable to the spreading physical lattice spacing.
  double softening = 0.0;
  double softening_growth = 0.0;
  double theta = 0.5;  ///< tree opening angle
  FieldMethod method = FieldMethod::tree;
  /// Remove the mean (mass-weighted) acceleration so that the total momentum
  /// is conserved even though tree forces are not pairwise antisymmetric.
  bool remove_net_force = true;
  int probe_resolution = 48;

  double softening_at(double t) const { return softening + softening_growth * t; }
  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
};

/// Point charges q_j w_j at physical positions. Sources are kept in species
/// blocks; rank[j] is the index of source j inside its block, used to keep
/// co-located partners adjacent in the tree ordering.
struct SourceSet {
  std::vector<Vec3> positions;
  std::vector<double> charges;
  std::vector<std::uint32_t> rank;
  std::vector<std::size_t> block_offsets{0};

  std::size_t size() const { return positions.size(); }
  /// Appends one block.
  void add_block(std::span<const Vec3> x, std::span<const double> q);
};

/// Sources of a snapshot at its physical positions.
SourceSet physical_sources(const Snapshot& s);

/// E(x) = (1/4pi) sum_j q_j (x - x_j) / (|x - x_j|^2 + eps^2)^{3/2}.
/// Coincident pairs with eps = 0 are skipped. Each species block is summed
/// separately and the blocks are added in order, so a block and its negated
/// copy cancel exactly.
std::vector<Vec3> direct_field(const SourceSet& src, std::span<const Vec3> targets, double eps);

/// Barnes-Hut tree with octupole cells; see tree.hpp. Falls back to the
/// direct sum below 1000 sources.
std::vector<Vec3> tree_field(const SourceSet& src, std::span<const Vec3> targets, double eps, double theta);

/// Dispatch on cfg.method with eps = cfg.softening_at(t).
std::vector<Vec3> field_at(const SourceSet& src, std::span<const Vec3> targets, const FieldConfig& cfg,
                           double t);

struct SupField {
  double value = 0.0;
  Vec3 argmax{0.0, 0.0, 0.0};
  bool on_boundary = false;
  int resolution = 0;
  Grid3 probe{};
};

/// Probe box: bounding box of the source positions inflated by 20 % (at
/// least half width 1e-3 per axis).
Grid3 probe_grid(const SourceSet& src, int resolution);

/// max over probe nodes of |E|; first maximizer in row-major order. Warns if
/// the maximizer lies on the probe boundary.
SupField sup_field(const SourceSet& src, const Grid3& probe, const FieldConfig& cfg, double t);
SupField sup_field(const Snapshot& s, const FieldConfig& cfg);

/// Values of a limit function on a velocity grid: scalar (rho) or vector (E).
struct LimitProfile {
  Grid3 grid{};
  std::vector<double> scalar;
  std::vector<Vec3> vector;

  bool is_vector() const { return !vector.empty(); }
  /// Tricubic Catmull-Rom interpolation; zero outside the grid.
  double scalar_at(const Vec3& v) const;
  /// Tricubic interpolation; clamped to the nearest boundary value outside.
  Vec3 vector_at(const Vec3& v) const;
  double sup_norm() const;
};

/// E_inf(v) = (1/4pi) sum_w dv^3 rho(w) (v - w)/(|v - w|^2 + eps_v^2)^{3/2},
/// eps_v = smallest grid spacing. Throws std::invalid_argument if rho is
/// nonzero on the grid boundary.
LimitProfile limit_field(const LimitProfile& rho);

}  // namespace vpdecay
