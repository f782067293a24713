#include "vpdecay/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace vpdecay {

namespace {

constexpr int kBits = 21;
constexpr double kKeyMax = static_cast<double>((1u << kBits) - 1);

std::uint64_t spread(std::uint64_t v) {
  v &= 0x1fffff;
  v = (v | v << 32) & 0x1f00000000ffffULL;
  v = (v | v << 16) & 0x1f0000ff0000ffULL;
  v = (v | v << 8) & 0x100f00f00f00f00fULL;
  v = (v | v << 4) & 0x10c30c30c30c30c3ULL;
  v = (v | v << 2) & 0x1249249249249249ULL;
  return v;
}

std::pair<Vec3, Vec3> bounds(std::span<const Vec3> p) {
  Vec3 lo{0.0, 0.0, 0.0}, hi{0.0, 0.0, 0.0};
  if (p.empty()) return {lo, hi};
  lo = hi = p[0];
  for (const auto& x : p) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], x[a]);
      hi[a] = std::max(hi[a], x[a]);
    }
  }
  return {lo, hi};
}

Vec3 key_scale(const Vec3& lo, const Vec3& hi) {
  Vec3 s{};
  for (int a = 0; a < 3; ++a) {
    const double ext = hi[a] - lo[a];
    s[a] = ext > 0.0 ? kKeyMax / ext : 0.0;
  }
  return s;
}

}  // namespace

std::uint64_t morton_key(const Vec3& p, const Vec3& lo, const Vec3& scale) {
  std::uint64_t k = 0;
  for (int a = 0; a < 3; ++a) {
    const double u = std::clamp((p[a] - lo[a]) * scale[a], 0.0, kKeyMax);
    k |= spread(static_cast<std::uint64_t>(u)) << (2 - a);
  }
  return k;
}

Tree::Tree(const SourceSet& src) {
  const std::size_t n = src.size();
  if (n >= (1ull << 31)) throw std::invalid_argument("Tree: too many sources");
  const auto [lo, hi] = bounds(src.positions);
  lo_ = lo;
  scale_ = key_scale(lo, hi);

  std::vector<std::uint32_t> block(n, 0);
  for (std::size_t b = 0; b + 1 < src.block_offsets.size(); ++b) {
    for (std::size_t j = src.block_offsets[b]; j < src.block_offsets[b + 1]; ++j) block[j] = static_cast<std::uint32_t>(b);
  }
  std::vector<std::uint64_t> keys(n);
  for (std::size_t j = 0; j < n; ++j) keys[j] = morton_key(src.positions[j], lo_, scale_);
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (keys[a] != keys[b]) return keys[a] < keys[b];
    if (src.positions[a] != src.positions[b]) return src.positions[a] < src.positions[b];
    if (src.rank[a] != src.rank[b]) return src.rank[a] < src.rank[b];
    return block[a] < block[b];
  });
  x_.resize(n);
  y_.resize(n);
  z_.resize(n);
  q_.resize(n);
  keys_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = order[i];
    x_[i] = src.positions[j][0];
    y_[i] = src.positions[j][1];
    z_[i] = src.positions[j][2];
    q_[i] = src.charges[j];
    keys_[i] = keys[j];
  }
  nodes_.reserve(2 * n / kLeafSize + 16);
  if (n == 0) return;
  Node root;
  root.end = static_cast<std::uint32_t>(n);
  nodes_.push_back(root);
  build(0, 0);
}

void Tree::build(std::size_t idx, int level) {
  moments(nodes_[idx]);
  const std::uint32_t b = nodes_[idx].begin;
  const std::uint32_t e = nodes_[idx].end;
  auto octant = [&](std::uint32_t i, int lv) { return (keys_[i] >> (3 * (kBits - 1 - lv))) & 7u; };
  // skip levels on which every key falls into one octant
  while (e - b > static_cast<std::uint32_t>(kLeafSize) && level < kBits && octant(b, level) == octant(e - 1, level)) {
    ++level;
  }
  if (e - b <= static_cast<std::uint32_t>(kLeafSize) || level >= kBits) return;

  std::vector<std::pair<std::uint32_t, std::uint32_t>> ranges;
  for (std::uint32_t i = b; i < e;) {
    const auto o = octant(i, level);
    std::uint32_t j = i + 1;
    while (j < e && octant(j, level) == o) ++j;
    ranges.emplace_back(i, j);
    i = j;
  }
  const auto first = nodes_.size();
  nodes_[idx].first_child = static_cast<std::int32_t>(first);
  nodes_[idx].child_count = static_cast<std::int32_t>(ranges.size());
  for (const auto& [cb, ce] : ranges) {
    Node c;
    c.begin = cb;
    c.end = ce;
    nodes_.push_back(c);
  }
  for (std::size_t c = 0; c < ranges.size(); ++c) build(first + c, level + 1);
}

void Tree::moments(Node& nd) const {
  Vec3 lo{x_[nd.begin], y_[nd.begin], z_[nd.begin]};
  Vec3 hi = lo;
  for (std::uint32_t i = nd.begin; i < nd.end; ++i) {
    lo[0] = std::min(lo[0], x_[i]);
    lo[1] = std::min(lo[1], y_[i]);
    lo[2] = std::min(lo[2], z_[i]);
    hi[0] = std::max(hi[0], x_[i]);
    hi[1] = std::max(hi[1], y_[i]);
    hi[2] = std::max(hi[2], z_[i]);
  }
  const Vec3 c{0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])};
  nd.center = c;
  nd.q = 0.0;
  nd.d = {0.0, 0.0, 0.0};
  nd.s = {};
  nd.o = {};
  double b2 = 0.0;
  for (std::uint32_t i = nd.begin; i < nd.end; ++i) {
    const double dx = x_[i] - c[0];
    const double dy = y_[i] - c[1];
    const double dz = z_[i] - c[2];
    const double q = q_[i];
    nd.q += q;
    nd.d[0] += q * dx;
    nd.d[1] += q * dy;
    nd.d[2] += q * dz;
    nd.s[0] += q * dx * dx;
    nd.s[1] += q * dy * dy;
    nd.s[2] += q * dz * dz;
    nd.s[3] += q * dx * dy;
    nd.s[4] += q * dx * dz;
    nd.s[5] += q * dy * dz;
    nd.o[0] += q * dx * dx * dx;
    nd.o[1] += q * dy * dy * dy;
    nd.o[2] += q * dz * dz * dz;
    nd.o[3] += q * dx * dx * dy;
    nd.o[4] += q * dx * dx * dz;
    nd.o[5] += q * dx * dy * dy;
    nd.o[6] += q * dy * dy * dz;
    nd.o[7] += q * dx * dz * dz;
    nd.o[8] += q * dy * dz * dz;
    nd.o[9] += q * dx * dy * dz;
    b2 = std::max(b2, dx * dx + dy * dy + dz * dz);
  }
  nd.bmax = std::sqrt(b2);
}

std::vector<Vec3> Tree::field(std::span<const Vec3> targets, double eps, double theta) const {
  if (!(theta > 0.0)) throw std::invalid_argument("Tree::field: theta must be > 0");
  std::vector<Vec3> out(targets.size(), Vec3{0.0, 0.0, 0.0});
  if (targets.empty() || nodes_.empty()) return out;

  // group spatially close targets
  const auto [tlo, thi] = bounds(targets);
  const Vec3 tscale = key_scale(tlo, thi);
  std::vector<std::pair<std::uint64_t, std::uint32_t>> tk(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    tk[i] = {morton_key(targets[i], tlo, tscale), static_cast<std::uint32_t>(i)};
  }
  std::sort(tk.begin(), tk.end());
  const std::size_t groups = (targets.size() + kGroupSize - 1) / kGroupSize;
  const double eps2 = eps * eps;
  const double inv_theta2 = 1.0 / (theta * theta);
  constexpr double k4pi = 1.0 / (4.0 * std::numbers::pi);

  parallel_for(groups, [&](std::size_t g0, std::size_t g1) {
    alignas(64) double tx[kGroupSize], ty[kGroupSize], tz[kGroupSize];
    alignas(64) double ex[kGroupSize], ey[kGroupSize], ez[kGroupSize];
    std::vector<std::int32_t> stack;
    stack.reserve(256);
    for (std::size_t g = g0; g < g1; ++g) {
      const std::size_t off = g * kGroupSize;
      const int m = static_cast<int>(std::min<std::size_t>(kGroupSize, targets.size() - off));
      Vec3 glo = targets[tk[off].second];
      Vec3 ghi = glo;
      for (int i = 0; i < m; ++i) {
        const Vec3& p = targets[tk[off + i].second];
        tx[i] = p[0];
        ty[i] = p[1];
        tz[i] = p[2];
        ex[i] = ey[i] = ez[i] = 0.0;
        for (int a = 0; a < 3; ++a) {
          glo[a] = std::min(glo[a], p[a]);
          ghi[a] = std::max(ghi[a], p[a]);
        }
      }
      stack.clear();
      stack.push_back(0);
      while (!stack.empty()) {
        const Node& nd = nodes_[stack.back()];
        stack.pop_back();
        double d2 = 0.0;
        for (int a = 0; a < 3; ++a) {
          const double d = std::max({0.0, glo[a] - nd.center[a], nd.center[a] - ghi[a]});
          d2 += d * d;
        }
        if (d2 > nd.bmax * nd.bmax * inv_theta2) {
          const double cx = nd.center[0], cy = nd.center[1], cz = nd.center[2];
          const double Q = nd.q, Dx = nd.d[0], Dy = nd.d[1], Dz = nd.d[2];
          const double Sxx = nd.s[0], Syy = nd.s[1], Szz = nd.s[2], Sxy = nd.s[3], Sxz = nd.s[4], Syz = nd.s[5];
          const double trS = Sxx + Syy + Szz;
          const auto& o = nd.o;
          // trace vector sum_j q |y|^2 y
          const double Tx = o[0] + o[5] + o[7], Ty = o[3] + o[1] + o[8], Tz = o[4] + o[6] + o[2];
          for (int i = 0; i < m; ++i) {
            const double rx = tx[i] - cx, ry = ty[i] - cy, rz = tz[i] - cz;
            const double R2 = rx * rx + ry * ry + rz * rz + eps2;
            const double iR = 1.0 / std::sqrt(R2);
            const double iR2 = iR * iR;
            const double iR3 = iR * iR2;
            const double iR5 = iR3 * iR2;
            const double iR7 = iR5 * iR2;
            const double iR9 = iR7 * iR2;
            const double Dr = Dx * rx + Dy * ry + Dz * rz;
            const double Srx = Sxx * rx + Sxy * ry + Sxz * rz;
            const double Sry = Sxy * rx + Syy * ry + Syz * rz;
            const double Srz = Sxz * rx + Syz * ry + Szz * rz;
            const double rSr = rx * Srx + ry * Sry + rz * Srz;
            const double radial = Q * iR3 + 3.0 * Dr * iR5 + 7.5 * rSr * iR7 - 1.5 * trS * iR5;
            const double xx = rx * rx, yy = ry * ry, zz = rz * rz;
            const double xy = rx * ry, xz = rx * rz, yz = ry * rz;
            const double Orx = o[0] * xx + o[5] * yy + o[7] * zz + 2.0 * (o[3] * xy + o[4] * xz + o[9] * yz);
            const double Ory = o[3] * xx + o[1] * yy + o[8] * zz + 2.0 * (o[5] * xy + o[9] * xz + o[6] * yz);
            const double Orz = o[4] * xx + o[6] * yy + o[2] * zz + 2.0 * (o[9] * xy + o[7] * xz + o[8] * yz);
            const double Orrr = rx * Orx + ry * Ory + rz * Orz;
            const double Tr = Tx * rx + Ty * ry + Tz * rz;
            const double radial3 = 17.5 * Orrr * iR9 - 7.5 * Tr * iR7;
            ex[i] += (radial + radial3) * rx - Dx * iR3 - 3.0 * Srx * iR5 - 7.5 * Orx * iR7 + 1.5 * Tx * iR5;
            ey[i] += (radial + radial3) * ry - Dy * iR3 - 3.0 * Sry * iR5 - 7.5 * Ory * iR7 + 1.5 * Ty * iR5;
            ez[i] += (radial + radial3) * rz - Dz * iR3 - 3.0 * Srz * iR5 - 7.5 * Orz * iR7 + 1.5 * Tz * iR5;
          }
        } else if (nd.child_count == 0) {
          for (std::uint32_t j = nd.begin; j < nd.end; ++j) {
            const double sx = x_[j], sy = y_[j], sz = z_[j], q = q_[j];
            for (int i = 0; i < m; ++i) {
              const double dx = tx[i] - sx, dy = ty[i] - sy, dz = tz[i] - sz;
              const double r2 = dx * dx + dy * dy + dz * dz + eps2;
              const double w = r2 > 0.0 ? q / (r2 * std::sqrt(r2)) : 0.0;
              ex[i] += w * dx;
              ey[i] += w * dy;
              ez[i] += w * dz;
            }
          }
        } else {
          for (int c = nd.child_count - 1; c >= 0; --c) stack.push_back(nd.first_child + c);
        }
      }
      for (int i = 0; i < m; ++i) out[tk[off + i].second] = {k4pi * ex[i], k4pi * ey[i], k4pi * ez[i]};
    }
  });
  return out;
}

}  // namespace vpdecay
