#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vpdecay/field.hpp"

namespace vpdecay {

/// Octree over Morton-sorted sources. Every cell stores its charge moments up
/// to third order about the center of its tight bounding box; cells are
/// accepted for a group of targets when the distance from the group box to
/// the cell center exceeds b_max / theta.
///
/// Co-located sources share a Morton key and therefore always share a leaf;
/// ties are ordered by (position, rank, block) so equal and opposite partners
/// are summed back to back and cancel exactly.
class Tree {
 public:
  static constexpr int kLeafSize = 16;
  static constexpr int kGroupSize = 32;

  explicit Tree(const SourceSet& src);

  std::vector<Vec3> field(std::span<const Vec3> targets, double eps, double theta) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t first_child = -1;  ///< children are contiguous
    std::int32_t child_count = 0;
    Vec3 center{};
    double bmax = 0.0;
    double q = 0.0;
    Vec3 d{};
    std::array<double, 6> s{};   ///< xx yy zz xy xz yz
    std::array<double, 10> o{};  ///< xxx yyy zzz xxy xxz xyy yyz xzz yzz xyz
  };

  void build(std::size_t node, int level);
  void moments(Node& n) const;

  std::vector<double> x_, y_, z_, q_;
  std::vector<std::uint64_t> keys_;
  std::vector<Node> nodes_;
  Vec3 lo_{}, scale_{};
};

/// 63-bit Morton key of a point in a box (21 bits per axis).
std::uint64_t morton_key(const Vec3& p, const Vec3& lo, const Vec3& scale);

}  // namespace vpdecay
