#include "vpdecay/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "vpdecay/tree.hpp"

namespace vpdecay {

namespace {
constexpr double k4pi = 1.0 / (4.0 * std::numbers::pi);
constexpr std::size_t kTreeThreshold = 1000;
}  // namespace

std::string to_string(FieldMethod m) { return m == FieldMethod::direct ? "direct" : "tree"; }

FieldMethod field_method_from_string(const std::string& tag) {
  if (tag == "direct") return FieldMethod::direct;
  if (tag == "tree") return FieldMethod::tree;
  throw std::invalid_argument("unknown field method '" + tag + "' (expected direct|tree)");
}

void FieldConfig::validate() const {
  if (!(softening >= 0.0)) throw std::invalid_argument("softening: must be >= 0");
  if (!(softening_growth >= 0.0)) throw std::invalid_argument("softening_growth: must be >= 0");
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta: must lie in (0, 1]");
  if (probe_resolution < 2) throw std::invalid_argument("probe_resolution: must be >= 2");
}

void SourceSet::add_block(std::span<const Vec3> x, std::span<const double> q) {
  if (x.size() != q.size()) throw std::invalid_argument("SourceSet::add_block: size mismatch");
  positions.insert(positions.end(), x.begin(), x.end());
  charges.insert(charges.end(), q.begin(), q.end());
  for (std::size_t j = 0; j < x.size(); ++j) rank.push_back(static_cast<std::uint32_t>(j));
  block_offsets.push_back(positions.size());
}

SourceSet physical_sources(const Snapshot& s) {
  SourceSet src;
  const auto& e = s.ensemble();
  for (std::size_t a = 0; a < e.size(); ++a) {
    const double q = e[a].species().charge;
    std::vector<double> c(e[a].size());
    const auto w = e[a].weights();
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = q * w[j];
    src.add_block(s.physical_positions(a), c);
  }
  return src;
}

std::vector<Vec3> direct_field(const SourceSet& src, std::span<const Vec3> targets, double eps) {
  std::vector<Vec3> out(targets.size(), Vec3{0.0, 0.0, 0.0});
  const double eps2 = eps * eps;
  const std::size_t blocks = src.block_offsets.size() - 1;
  parallel_for(targets.size(), [&](std::size_t i0, std::size_t i1) {
    for (std::size_t i = i0; i < i1; ++i) {
      const Vec3& x = targets[i];
      Vec3 total{0.0, 0.0, 0.0};
      for (std::size_t b = 0; b < blocks; ++b) {
        double ex = 0.0, ey = 0.0, ez = 0.0;
        for (std::size_t j = src.block_offsets[b]; j < src.block_offsets[b + 1]; ++j) {
          const double dx = x[0] - src.positions[j][0];
          const double dy = x[1] - src.positions[j][1];
          const double dz = x[2] - src.positions[j][2];
          const double r2 = dx * dx + dy * dy + dz * dz + eps2;
          if (r2 == 0.0) continue;
          const double w = src.charges[j] / (r2 * std::sqrt(r2));
          ex += w * dx;
          ey += w * dy;
          ez += w * dz;
        }
        total[0] += ex;
        total[1] += ey;
        total[2] += ez;
      }
      out[i] = {k4pi * total[0], k4pi * total[1], k4pi * total[2]};
    }
  });
  return out;
}

std::vector<Vec3> tree_field(const SourceSet& src, std::span<const Vec3> targets, double eps, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("tree_field: theta must lie in (0, 1]");
  if (src.size() < kTreeThreshold) return direct_field(src, targets, eps);
  return Tree(src).field(targets, eps, theta);
}

std::vector<Vec3> field_at(const SourceSet& src, std::span<const Vec3> targets, const FieldConfig& cfg,
                           double t) {
  const double eps = cfg.softening_at(t);
  return cfg.method == FieldMethod::direct ? direct_field(src, targets, eps)
                                           : tree_field(src, targets, eps, cfg.theta);
}

Grid3 probe_grid(const SourceSet& src, int resolution) {
  if (resolution < 2) throw std::invalid_argument("probe resolution must be >= 2");
  Vec3 lo{-1.0, -1.0, -1.0}, hi{1.0, 1.0, 1.0};
  if (!src.positions.empty()) {
    lo = hi = src.positions[0];
    for (const auto& p : src.positions) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], p[a]);
        hi[a] = std::max(hi[a], p[a]);
      }
    }
  }
  for (int a = 0; a < 3; ++a) {
    const double c = 0.5 * (lo[a] + hi[a]);
    const double h = std::max(0.6 * (hi[a] - lo[a]), 1e-3);
    lo[a] = c - h;
    hi[a] = c + h;
  }
  return Grid3::box(lo, hi, resolution);
}

SupField sup_field(const SourceSet& src, const Grid3& probe, const FieldConfig& cfg, double t) {
  probe.validate();
  std::vector<Vec3> nodes(probe.size());
  for (std::size_t f = 0; f < nodes.size(); ++f) nodes[f] = probe.node(f);
  const auto E = field_at(src, nodes, cfg, t);
  SupField r;
  r.probe = probe;
  r.resolution = probe.axes[0].n;
  std::size_t best = 0;
  for (std::size_t f = 0; f < E.size(); ++f) {
    const double m = norm(E[f]);
    if (m > r.value) {
      r.value = m;
      best = f;
    }
  }
  r.argmax = nodes[best];
  const std::size_t nk = probe.axes[2].n, nj = probe.axes[1].n;
  const int k = static_cast<int>(best % nk);
  const int j = static_cast<int>((best / nk) % nj);
  const int i = static_cast<int>(best / (nk * nj));
  r.on_boundary = r.value > 0.0 && (i == 0 || j == 0 || k == 0 || i == probe.axes[0].n - 1 ||
                                    j == probe.axes[1].n - 1 || k == probe.axes[2].n - 1);
  if (r.on_boundary) {
    std::ostringstream msg;
    msg << "sup_field at t=" << t << ": maximizer on probe boundary (support under-covered)";
    warn(msg.str());
  }
  return r;
}

SupField sup_field(const Snapshot& s, const FieldConfig& cfg) {
  const SourceSet src = physical_sources(s);
  return sup_field(src, probe_grid(src, cfg.probe_resolution), cfg, s.time());
}

// ------------------------------------------------------------ limit profiles

namespace {

double catmull_rom(double p0, double p1, double p2, double p3, double u) {
  return p1 + 0.5 * u * (p2 - p0 + u * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + u * (3.0 * (p1 - p2) + p3 - p0)));
}

/// Tricubic interpolation of a node function; indices clamped at the edges.
template <typename Get>
double tricubic(const Grid3& g, const Vec3& v, Get get) {
  int base[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    const double s = (v[a] - g.axes[a].lo) / g.axes[a].spacing();
    const int i = std::clamp(static_cast<int>(std::floor(s)), 0, g.axes[a].n - 2);
    base[a] = i;
    frac[a] = std::clamp(s - i, 0.0, 1.0);
  }
  auto idx = [&](int a, int o) { return std::clamp(base[a] + o, 0, g.axes[a].n - 1); };
  double plane[4];
  for (int di = 0; di < 4; ++di) {
    double line[4];
    for (int dj = 0; dj < 4; ++dj) {
      double p[4];
      for (int dk = 0; dk < 4; ++dk) p[dk] = get(g.index(idx(0, di - 1), idx(1, dj - 1), idx(2, dk - 1)));
      line[dj] = catmull_rom(p[0], p[1], p[2], p[3], frac[2]);
    }
    plane[di] = catmull_rom(line[0], line[1], line[2], line[3], frac[1]);
  }
  return catmull_rom(plane[0], plane[1], plane[2], plane[3], frac[0]);
}

bool inside(const Grid3& g, const Vec3& v) {
  for (int a = 0; a < 3; ++a) {
    if (!(v[a] >= g.axes[a].lo && v[a] <= g.axes[a].hi)) return false;
  }
  return true;
}

}  // namespace

double LimitProfile::scalar_at(const Vec3& v) const {
  if (scalar.empty() || !inside(grid, v)) return 0.0;
  return tricubic(grid, v, [&](std::size_t f) { return scalar[f]; });
}

Vec3 LimitProfile::vector_at(const Vec3& v) const {
  if (vector.empty()) return {0.0, 0.0, 0.0};
  Vec3 c = v;
  for (int a = 0; a < 3; ++a) c[a] = std::clamp(c[a], grid.axes[a].lo, grid.axes[a].hi);
  Vec3 out{};
  for (int a = 0; a < 3; ++a) out[a] = tricubic(grid, c, [&](std::size_t f) { return vector[f][a]; });
  return out;
}

double LimitProfile::sup_norm() const {
  double m = 0.0;
  for (double s : scalar) m = std::max(m, std::abs(s));
  for (const auto& e : vector) m = std::max(m, norm(e));
  return m;
}

LimitProfile limit_field(const LimitProfile& rho) {
  rho.grid.validate();
  if (rho.scalar.size() != rho.grid.size()) throw std::invalid_argument("limit_field: scalar profile expected");
  const auto& g = rho.grid;
  for (int i = 0; i < g.axes[0].n; ++i) {
    for (int j = 0; j < g.axes[1].n; ++j) {
      for (int k = 0; k < g.axes[2].n; ++k) {
        const bool edge = i == 0 || j == 0 || k == 0 || i == g.axes[0].n - 1 || j == g.axes[1].n - 1 ||
                          k == g.axes[2].n - 1;
        if (edge && rho.scalar[g.index(i, j, k)] != 0.0) {
          throw std::invalid_argument("limit_field: density support touches the grid boundary");
        }
      }
    }
  }
  const double eps = std::min({g.axes[0].spacing(), g.axes[1].spacing(), g.axes[2].spacing()});
  const double dv3 = g.cell_volume();
  SourceSet src;
  std::vector<Vec3> nodes(g.size());
  std::vector<double> q(g.size());
  for (std::size_t f = 0; f < g.size(); ++f) {
    nodes[f] = g.node(f);
    q[f] = dv3 * rho.scalar[f];
  }
  src.add_block(nodes, q);
  LimitProfile out;
  out.grid = g;
  out.vector = direct_field(src, nodes, eps);
  return out;
}

}  // namespace vpdecay
