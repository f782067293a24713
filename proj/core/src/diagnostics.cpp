#include "vpdecay/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "vpdecay/quadrature.hpp"

namespace vpdecay {

double kde_kernel(double u, int order) {
  if (order < 0 || order > 6) throw std::invalid_argument("kde_kernel: order must lie in [0, 6]");
  if (!(std::abs(u) < 1.0)) return 0.0;
  constexpr double c = 35.0 / 32.0;
  const double u2 = u * u;
  switch (order) {
    case 0: {
      const double s = 1.0 - u2;
      return c * s * s * s;
    }
    case 1:
      return c * u * (-6.0 + u2 * (12.0 - 6.0 * u2));
    case 2:
      return c * (-6.0 + u2 * (36.0 - 30.0 * u2));
    case 3:
      return c * u * (72.0 - 120.0 * u2);
    case 4:
      return c * (72.0 - 360.0 * u2);
    case 5:
      return c * (-720.0 * u);
    default:
      return c * -720.0;
  }
}

double DensityField::sup_norm() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double DensityField::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.cell_volume();
}

std::vector<double> DensityField::rescaled(int ell) const {
  const double f = std::pow(t, ell + 3);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = f * values[i];
  return out;
}

namespace {

/// Kernel samples k^{(order)}((node - x)/h) / h^{1+order} at the grid nodes of
/// one axis within reach of x. Order 0 is normalized over the infinite
/// lattice so that its node sum times the spacing is exactly 1.
struct AxisWeights {
  int first = 0;
  std::vector<std::vector<double>> by_order;  // [order][node - first]
  double inside = 1.0;                         // fraction of the order-0 mass on the grid
};

AxisWeights axis_weights(const Axis& ax, double x, double h, int max_order) {
  AxisWeights r;
  r.by_order.assign(max_order + 1, {});
  const double d = ax.spacing();
  const long lo = static_cast<long>(std::ceil((x - h - ax.lo) / d));
  const long hi = static_cast<long>(std::floor((x + h - ax.lo) / d));
  double total = 0.0, kept = 0.0;
  std::vector<double> raw0;
  for (long i = lo; i <= hi; ++i) {
    const double u = (ax.lo + i * d - x) / h;
    const double k = kde_kernel(u, 0);
    total += k;
    if (i >= 0 && i < ax.n) kept += k;
  }
  const long a = std::max<long>(lo, 0);
  const long b = std::min<long>(hi, ax.n - 1);
  r.first = static_cast<int>(a);
  if (b < a || total <= 0.0) {
    r.inside = 0.0;
    return r;
  }
  r.inside = kept / total;
  for (int o = 0; o <= max_order; ++o) r.by_order[o].resize(static_cast<std::size_t>(b - a + 1));
  for (long i = a; i <= b; ++i) {
    const double u = (ax.lo + i * d - x) / h;
    r.by_order[0][i - a] = kde_kernel(u, 0) / (total * d);
    for (int o = 1; o <= max_order; ++o) r.by_order[o][i - a] = kde_kernel(u, o) / std::pow(h, 1 + o);
  }
  return r;
}

}  // namespace

DensityField density(const Snapshot& s, const Grid3& grid, double h) {
  grid.validate();
  const double dmax = std::max({grid.axes[0].spacing(), grid.axes[1].spacing(), grid.axes[2].spacing()});
  if (!(h >= dmax * (1.0 - 1e-12))) throw std::invalid_argument("density: bandwidth must be >= grid spacing");
  DensityField out;
  out.t = s.time();
  out.grid = grid;
  out.bandwidth = h;
  out.values.assign(grid.size(), 0.0);
  std::vector<double> sq(grid.size(), 0.0);
  std::vector<double> acc(grid.size());
  double total = 0.0, lost = 0.0;
  const auto& e = s.ensemble();
  for (std::size_t a = 0; a < e.size(); ++a) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const double q = e[a].species().charge;
    const auto x = s.physical_positions(a);
    const auto w = e[a].weights();
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double qw = q * w[j];
      const AxisWeights ax = axis_weights(grid.axes[0], x[j][0], h, 0);
      const AxisWeights ay = axis_weights(grid.axes[1], x[j][1], h, 0);
      const AxisWeights az = axis_weights(grid.axes[2], x[j][2], h, 0);
      const double inside = ax.inside * ay.inside * az.inside;
      total += std::abs(qw);
      lost += std::abs(qw) * (1.0 - inside);
      if (inside == 0.0) continue;
      const auto& kx = ax.by_order[0];
      const auto& ky = ay.by_order[0];
      const auto& kz = az.by_order[0];
      for (std::size_t i = 0; i < kx.size(); ++i) {
        for (std::size_t jj = 0; jj < ky.size(); ++jj) {
          const double cxy = qw * kx[i] * ky[jj];
          const std::size_t base = grid.index(ax.first + static_cast<int>(i), ay.first + static_cast<int>(jj), az.first);
          for (std::size_t k = 0; k < kz.size(); ++k) {
            const double c = cxy * kz[k];
            acc[base + k] += c;
            sq[base + k] += c * c;
          }
        }
      }
    }
    for (std::size_t f = 0; f < acc.size(); ++f) out.values[f] += acc[f];
  }
  for (double v : sq) out.noise = std::max(out.noise, std::sqrt(v));
  out.outside_fraction = total > 0.0 ? lost / total : 0.0;
  if (out.outside_fraction > 1e-3) {
    std::ostringstream msg;
    msg << "density at t=" << s.time() << ": " << 100.0 * out.outside_fraction << "% of the charge lies outside the grid";
    warn(msg.str());
  }
  return out;
}

// ------------------------------------------------------------------ oracle

Grid3 free_stream_grid(const InitialData& data, double t, int n) {
  if (data.f0.empty()) throw std::invalid_argument("free_stream_grid: no species");
  Vec3 lo{}, hi{};
  bool first = true;
  for (const auto& f : data.f0) {
    const auto [xl, xh] = f.x_box();
    const auto [vl, vh] = f.v_box();
    for (int a = 0; a < 3; ++a) {
      const double l = xl[a] + std::min(t * vl[a], t * vh[a]);
      const double u = xh[a] + std::max(t * vl[a], t * vh[a]);
      lo[a] = first ? l : std::min(lo[a], l);
      hi[a] = first ? u : std::max(hi[a], u);
    }
    first = false;
  }
  for (int a = 0; a < 3; ++a) {
    const double c = 0.5 * (lo[a] + hi[a]);
    const double w = 0.525 * (hi[a] - lo[a]);
    lo[a] = c - w;
    hi[a] = c + w;
  }
  return Grid3::box(lo, hi, n);
}

namespace {

constexpr double kOracleTolerance = 1e-12;
constexpr double kPanelTolerance = 1e-16;

/// t^{-1} int a(y) b((x - y)/t) dy over the overlap of the supports.
QuadratureResult streamed_factor(const Profile1D& a, const Profile1D& b, double x, double t) {
  const auto [a0, a1] = a.support();
  const auto [b0, b1] = b.support();
  const double lo = std::max(a0, x - t * b1);
  const double hi = std::min(a1, x - t * b0);
  QuadratureResult r;
  if (!(hi > lo)) return r;
  r = integrate_adaptive([&](double y) { return a(y) * b((x - y) / t); }, lo, hi, kPanelTolerance, 30);
  r.value /= t;
  r.error /= t;
  return r;
}

}  // namespace

OracleValues free_stream_density(const InitialData& data, double t, const std::vector<Vec3>& points) {
  if (!(t > 0.0)) throw std::invalid_argument("free_stream_density: t must be > 0");
  const PhaseSpaceDensity net = data.net();
  OracleValues out;
  out.values.assign(points.size(), 0.0);
  for (std::size_t p = 0; p < points.size(); ++p) {
    double v = 0.0, err = 0.0;
    for (const auto& term : net.terms()) {
      std::array<QuadratureResult, 3> f;
      for (int a = 0; a < 3; ++a) f[a] = streamed_factor(*term.x_factors[a], *term.v_factors[a], points[p][a], t);
      v += term.coefficient * f[0].value * f[1].value * f[2].value;
      err += std::abs(term.coefficient) *
             (f[0].error * std::abs(f[1].value * f[2].value) + f[1].error * std::abs(f[0].value * f[2].value) +
              f[2].error * std::abs(f[0].value * f[1].value));
    }
    out.values[p] = v;
    out.error = std::max(out.error, err);
  }
  if (out.error > kOracleTolerance) {
    throw std::runtime_error("free_stream_density: quadrature error estimate above tolerance");
  }
  return out;
}

DensityField free_stream_density(const InitialData& data, double t, const Grid3& grid) {
  if (!(t > 0.0)) throw std::invalid_argument("free_stream_density: t must be > 0");
  grid.validate();
  const PhaseSpaceDensity net = data.net();
  const auto& terms = net.terms();
  // tables[term][axis][node]
  std::vector<std::array<std::vector<QuadratureResult>, 3>> tables(terms.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    for (int a = 0; a < 3; ++a) {
      const Axis& ax = grid.axes[a];
      tables[k][a].resize(ax.n);
      parallel_for(static_cast<std::size_t>(ax.n), [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
          tables[k][a][i] = streamed_factor(*terms[k].x_factors[a], *terms[k].v_factors[a], ax.node(static_cast<int>(i)), t);
        }
      });
    }
  }
  DensityField out;
  out.t = t;
  out.grid = grid;
  out.values.assign(grid.size(), 0.0);
  double err_max = 0.0;
  for (int i = 0; i < grid.axes[0].n; ++i) {
    for (int j = 0; j < grid.axes[1].n; ++j) {
      for (int l = 0; l < grid.axes[2].n; ++l) {
        double v = 0.0, err = 0.0;
        for (std::size_t k = 0; k < terms.size(); ++k) {
          const auto& f0 = tables[k][0][i];
          const auto& f1 = tables[k][1][j];
          const auto& f2 = tables[k][2][l];
          v += terms[k].coefficient * f0.value * f1.value * f2.value;
          err += std::abs(terms[k].coefficient) *
                 (f0.error * std::abs(f1.value * f2.value) + f1.error * std::abs(f0.value * f2.value) +
                  f2.error * std::abs(f0.value * f1.value));
        }
        out.values[grid.index(i, j, l)] = v;
        err_max = std::max(err_max, err);
      }
    }
  }
  if (err_max > kOracleTolerance) {
    throw std::runtime_error("free_stream_density: quadrature error estimate above tolerance");
  }
  return out;
}

double free_stream_field_sup(const InitialData& data, double t, int n, double theta) {
  const Grid3 grid = free_stream_grid(data, t, n);
  const DensityField rho = free_stream_density(data, t, grid);
  const double dv = grid.cell_volume();
  std::vector<Vec3> nodes(grid.size());
  std::vector<double> q(grid.size());
  for (std::size_t f = 0; f < grid.size(); ++f) {
    nodes[f] = grid.node(f);
    q[f] = rho.values[f] * dv;
  }
  SourceSet src;
  src.add_block(nodes, q);
  std::vector<Vec3> centers;
  centers.reserve(static_cast<std::size_t>(n - 1) * (n - 1) * (n - 1));
  for (int i = 0; i + 1 < n; ++i) {
    for (int j = 0; j + 1 < n; ++j) {
      for (int k = 0; k + 1 < n; ++k) {
        centers.push_back({grid.axes[0].node(i) + 0.5 * grid.axes[0].spacing(),
                           grid.axes[1].node(j) + 0.5 * grid.axes[1].spacing(),
                           grid.axes[2].node(k) + 0.5 * grid.axes[2].spacing()});
      }
    }
  }
  const auto E = tree_field(src, centers, 0.0, theta);
  double m = 0.0;
  for (const auto& e : E) m = std::max(m, norm(e));
  return m;
}

// ------------------------------------------------------- analytic limits

namespace {

struct TermMoments {
  // moments[axis][k] = int y^k a(y) dy
  std::array<std::vector<double>, 3> moments;
};

std::vector<TermMoments> term_moments(const PhaseSpaceDensity& net, int ell) {
  std::vector<TermMoments> out(net.terms().size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (int a = 0; a < 3; ++a) {
      for (int j = 0; j <= ell; ++j) out[k].moments[a].push_back(net.terms()[k].x_factors[a]->moment(j));
    }
  }
  return out;
}

}  // namespace

double analytic_rho_ell(const InitialData& data, int ell, const Vec3& v) {
  if (ell < 0) throw std::invalid_argument("analytic_rho_ell: ell must be >= 0");
  const PhaseSpaceDensity net = data.net();
  const auto mom = term_moments(net, ell);
  const auto betas = multi_indices_of_order(ell);
  double s = 0.0;
  for (std::size_t k = 0; k < net.terms().size(); ++k) {
    const auto& term = net.terms()[k];
    for (const auto& b : betas) {
      double p = term.coefficient * sign_of(b) / static_cast<double>(b.factorial());
      for (int a = 0; a < 3; ++a) p *= mom[k].moments[a][b[a]] * term.v_factors[a]->derivative(v[a], b[a]);
      s += p;
    }
  }
  return s;
}

LimitProfile analytic_rho_ell(const InitialData& data, int ell, const Grid3& vgrid) {
  if (ell < 0) throw std::invalid_argument("analytic_rho_ell: ell must be >= 0");
  vgrid.validate();
  const PhaseSpaceDensity net = data.net();
  const auto mom = term_moments(net, ell);
  const auto betas = multi_indices_of_order(ell);
  LimitProfile out;
  out.grid = vgrid;
  out.scalar.assign(vgrid.size(), 0.0);
  for (std::size_t k = 0; k < net.terms().size(); ++k) {
    const auto& term = net.terms()[k];
    // derivative tables [axis][order][node]
    std::array<std::vector<std::vector<double>>, 3> d;
    for (int a = 0; a < 3; ++a) {
      d[a].assign(ell + 1, std::vector<double>(vgrid.axes[a].n));
      for (int o = 0; o <= ell; ++o) {
        for (int i = 0; i < vgrid.axes[a].n; ++i) d[a][o][i] = term.v_factors[a]->derivative(vgrid.axes[a].node(i), o);
      }
    }
    for (const auto& b : betas) {
      const double c = term.coefficient * sign_of(b) / static_cast<double>(b.factorial()) *
                       mom[k].moments[0][b[0]] * mom[k].moments[1][b[1]] * mom[k].moments[2][b[2]];
      if (c == 0.0) continue;
      for (int i = 0; i < vgrid.axes[0].n; ++i) {
        for (int j = 0; j < vgrid.axes[1].n; ++j) {
          for (int l = 0; l < vgrid.axes[2].n; ++l) {
            out.scalar[vgrid.index(i, j, l)] += c * d[0][b[0]][i] * d[1][b[1]][j] * d[2][b[2]][l];
          }
        }
      }
    }
  }
  return out;
}

// ------------------------------------------------------------ moment tables

std::vector<MomentTable> moment_table(const Snapshot& s, int ell, const Grid3& vgrid, double h) {
  if (ell < 0 || ell > 3) throw std::invalid_argument("moment_table: ell must lie in [0, 3]");
  vgrid.validate();
  if (!(h > 0.0)) throw std::invalid_argument("moment_table: bandwidth must be > 0");
  const double dmin = std::min({vgrid.axes[0].spacing(), vgrid.axes[1].spacing(), vgrid.axes[2].spacing()});
  if (h < 2.0 * dmin) warn("moment_table: bandwidth below two grid spacings; derivative estimate unreliable");
  const auto betas = multi_indices_of_order(ell);
  std::vector<MomentTable> out;
  const auto& e = s.ensemble();
  for (std::size_t a = 0; a < e.size(); ++a) {
    MomentTable tab;
    tab.ell = ell;
    tab.species = a;
    tab.t = s.time();
    tab.grid = vgrid;
    tab.bandwidth = h;
    tab.values.assign(vgrid.size(), 0.0);
    const auto X = e[a].positions();
    const auto V = e[a].velocities();
    const auto w = e[a].weights();
    for (std::size_t j = 0; j < X.size(); ++j) {
      const AxisWeights ax = axis_weights(vgrid.axes[0], V[j][0], h, ell);
      const AxisWeights ay = axis_weights(vgrid.axes[1], V[j][1], h, ell);
      const AxisWeights az = axis_weights(vgrid.axes[2], V[j][2], h, ell);
      if (ax.inside == 0.0 || ay.inside == 0.0 || az.inside == 0.0) continue;
      const Vec3 minus_x{-X[j][0], -X[j][1], -X[j][2]};
      for (const auto& b : betas) {
        const double c = w[j] * monomial(minus_x, b) / static_cast<double>(b.factorial());
        if (c == 0.0) continue;
        const auto& kx = ax.by_order[b[0]];
        const auto& ky = ay.by_order[b[1]];
        const auto& kz = az.by_order[b[2]];
        for (std::size_t i = 0; i < kx.size(); ++i) {
          for (std::size_t jj = 0; jj < ky.size(); ++jj) {
            const double cxy = c * kx[i] * ky[jj];
            const std::size_t base =
                vgrid.index(ax.first + static_cast<int>(i), ay.first + static_cast<int>(jj), az.first);
            for (std::size_t k = 0; k < kz.size(); ++k) tab.values[base + k] += cxy * kz[k];
          }
        }
      }
    }
    out.push_back(std::move(tab));
  }
  return out;
}

TestFunction test_function(const Profile3D& phi) {
  return [phi](const Vec3& v, const MultiIndex& b) { return phi.derivative(v, b); };
}

TestFunction gaussian_test_function(const Vec3& center, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_test_function: width must be > 0");
  return [center, width](const Vec3& v, const MultiIndex& b) {
    double p = 1.0;
    for (int a = 0; a < 3; ++a) {
      const double z = (v[a] - center[a]) / width;
      // d^n/dz^n exp(-z^2/2) = (-1)^n He_n(z) exp(-z^2/2)
      double h0 = 1.0, h1 = z;
      const int n = b[a];
      double he = n == 0 ? h0 : h1;
      for (int k = 2; k <= n; ++k) {
        const double h2 = z * h1 - (k - 1) * h0;
        h0 = h1;
        h1 = h2;
        he = h2;
      }
      p *= ((n % 2) ? -he : he) * std::exp(-0.5 * z * z) / std::pow(width, n);
    }
    return p;
  };
}

std::vector<double> tested_moment(const Snapshot& s, int ell, const TestFunction& phi) {
  if (ell < 0) throw std::invalid_argument("tested_moment: ell must be >= 0");
  const auto betas = multi_indices_of_order(ell);
  std::vector<double> out;
  for (const auto& sp : s.ensemble()) {
    const auto X = sp.positions();
    const auto V = sp.velocities();
    const auto w = sp.weights();
    double m = 0.0;
    for (const auto& b : betas) {
      double part = 0.0;
      for (std::size_t j = 0; j < X.size(); ++j) part += w[j] * monomial(X[j], b) * phi(V[j], b);
      m += part / static_cast<double>(b.factorial());
    }
    out.push_back(m);
  }
  return out;
}

LimitProfile rho_ell(const std::vector<MomentTable>& tables, const std::vector<double>& charges) {
  if (tables.empty()) throw std::invalid_argument("rho_ell: no tables");
  LimitProfile out;
  out.grid = tables.front().grid;
  out.scalar.assign(out.grid.size(), 0.0);
  for (const auto& tab : tables) {
    if (tab.ell != tables.front().ell || tab.values.size() != out.scalar.size()) {
      throw std::invalid_argument("rho_ell: tables must share grid and order");
    }
    if (tab.species >= charges.size()) throw std::invalid_argument("rho_ell: missing charge for a species");
    const double q = charges[tab.species];
    for (std::size_t f = 0; f < out.scalar.size(); ++f) out.scalar[f] += q * tab.values[f];
  }
  return out;
}

double rho_ell_at(const LimitProfile& profile, double t, const Vec3& x) {
  if (!(t > 0.0)) throw std::invalid_argument("rho_ell_at: t must be > 0");
  return profile.scalar_at({x[0] / t, x[1] / t, x[2] / t});
}

}  // namespace vpdecay
