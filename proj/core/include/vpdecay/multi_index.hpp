#pragma once

#include <array>
#include <compare>
#include <vector>

#include "vpdecay/vec3.hpp"

namespace vpdecay {

/// Index beta in N_0^3 used for velocity derivatives D_v^beta and spatial
/// monomials y^beta.
class MultiIndex {
 public:
  constexpr MultiIndex() = default;
  /// Throws std::invalid_argument on a negative entry.
  MultiIndex(int b1, int b2, int b3);

  int operator[](int axis) const { return entries_[axis]; }
  const std::array<int, 3>& entries() const { return entries_; }

  int order() const { return entries_[0] + entries_[1] + entries_[2]; }
  /// beta_1! beta_2! beta_3!
  double factorial() const;

  /// Componentwise partial order: this <= other.
  bool precedes(const MultiIndex& other) const;
  /// this - gamma; requires gamma.precedes(*this).
  MultiIndex minus(const MultiIndex& gamma) const;

  auto operator<=>(const MultiIndex&) const = default;

 private:
  std::array<int, 3> entries_{0, 0, 0};
};

/// All beta with |beta| = order, ascending lexicographic (smallest axis last),
/// e.g. order 1 -> (0,0,1), (0,1,0), (1,0,0).
std::vector<MultiIndex> multi_indices_of_order(int order);

/// y_1^b1 y_2^b2 y_3^b3. The caller applies the sign for (-y)^beta.
double monomial(const Vec3& y, const MultiIndex& beta);

/// (-1)^{|beta|}
inline double sign_of(const MultiIndex& beta) { return (beta.order() % 2 == 0) ? 1.0 : -1.0; }

}  // namespace vpdecay
