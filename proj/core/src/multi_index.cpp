#include "vpdecay/multi_index.hpp"

#include <algorithm>
#include <stdexcept>

namespace vpdecay {

MultiIndex::MultiIndex(int b1, int b2, int b3) : entries_{b1, b2, b3} {
  if (b1 < 0 || b2 < 0 || b3 < 0) {
    throw std::invalid_argument("MultiIndex entries must be nonnegative");
  }
}

double MultiIndex::factorial() const {
  double f = 1.0;
  for (int e : entries_) {
    for (int k = 2; k <= e; ++k) f *= k;
  }
  return f;
}

bool MultiIndex::precedes(const MultiIndex& other) const {
  return entries_[0] <= other.entries_[0] && entries_[1] <= other.entries_[1] &&
         entries_[2] <= other.entries_[2];
}

MultiIndex MultiIndex::minus(const MultiIndex& gamma) const {
  if (!gamma.precedes(*this)) {
    throw std::invalid_argument("MultiIndex::minus: gamma does not precede beta");
  }
  return {entries_[0] - gamma.entries_[0], entries_[1] - gamma.entries_[1],
          entries_[2] - gamma.entries_[2]};
}

std::vector<MultiIndex> multi_indices_of_order(int order) {
  if (order < 0) throw std::invalid_argument("multi_indices_of_order: order must be >= 0");
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>((order + 1) * (order + 2) / 2));
  for (int b1 = 0; b1 <= order; ++b1) {
    for (int b2 = 0; b1 + b2 <= order; ++b2) {
      out.emplace_back(b1, b2, order - b1 - b2);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double monomial(const Vec3& y, const MultiIndex& beta) {
  double p = 1.0;
  for (int axis = 0; axis < 3; ++axis) {
    for (int k = 0; k < beta[axis]; ++k) p *= y[axis];
  }
  return p;
}

}  // namespace vpdecay
