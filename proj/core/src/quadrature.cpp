#include "vpdecay/quadrature.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace vpdecay {
namespace {

GaussRule compute_rule(int n) {
  GaussRule r;
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 0.0);
  const int half = n / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration on P_n starting from the Chebyshev-like guess; root
    // index i counts from the right end.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[n - 1 - i] = x;
    r.nodes[i] = -x;
    r.weights[n - 1 - i] = w;
    r.weights[i] = w;
  }
  if (n % 2 == 1) {
    double p0 = 1.0;
    double p1 = 0.0;
    for (int k = 2; k <= n; ++k) {
      const double pk = (-(k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    // P'_n(0) = n P_{n-1}(0)
    const double dp = n * p0;
    r.nodes[half] = 0.0;
    r.weights[half] = 2.0 / (dp * dp);
  }
  return r;
}

struct PanelSum {
  double value = 0.0;
  double magnitude = 0.0;  ///< integral of |f|, the rounding scale
};

PanelSum panel(const std::function<double(double)>& f, double a, double b, const GaussRule& rule) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  PanelSum s;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double w = rule.weights[i] * f(c + h * rule.nodes[i]);
    s.value += w;
    s.magnitude += std::abs(w);
  }
  s.value *= h;
  s.magnitude *= std::abs(h);
  return s;
}

void adapt(const std::function<double(double)>& f, double a, double b, double tol, int depth,
           QuadratureResult& acc) {
  const PanelSum coarse = panel(f, a, b, gauss_legendre(16));
  const PanelSum fine = panel(f, a, b, gauss_legendre(32));
  acc.evaluations += 48;
  const double err = std::abs(fine.value - coarse.value);
  // below the rounding floor further bisection cannot reduce the difference
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * fine.magnitude;
  if (err <= std::max(tol, floor) || depth <= 0 || !(b > a)) {
    acc.value += fine.value;
    acc.error += err;
    return;
  }
  const double m = 0.5 * (a + b);
  adapt(f, a, m, 0.5 * tol, depth - 1, acc);
  adapt(f, m, b, 0.5 * tol, depth - 1, acc);
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

GaussRule gauss_legendre(int n, double a, double b) {
  GaussRule r = gauss_legendre(n);
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    r.nodes[i] = c + h * r.nodes[i];
    r.weights[i] *= h;
  }
  return r;
}

double integrate_gauss(const std::function<double(double)>& f, double a, double b, int n) {
  return panel(f, a, b, gauss_legendre(n)).value;
}

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol, int max_depth) {
  QuadratureResult r;
  if (a == b) return r;
  adapt(f, a, b, abs_tol, max_depth, r);
  return r;
}

}  // namespace vpdecay
