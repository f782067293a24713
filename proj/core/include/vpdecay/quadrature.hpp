#pragma once

#include <functional>
#include <vector>

namespace vpdecay {

/// Gauss-Legendre nodes and weights on [-1, 1]; nodes ascending and exactly
/// mirror-symmetric (x[n-1-i] == -x[i]).
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point rule. Throws std::invalid_argument for n < 1.
const GaussRule& gauss_legendre(int n);

/// Rule mapped to [a, b].
GaussRule gauss_legendre(int n, double a, double b);

/// Fixed n-point Gauss-Legendre approximation of the integral over [a, b].
double integrate_gauss(const std::function<double(double)>& f, double a, double b, int n = 64);

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  ///< estimated absolute error
  int evaluations = 0;
};

/// Adaptive bisection comparing a 16-point and a 32-point rule on each panel.
/// Panels are accepted when their share of the tolerance is met, or when the
/// rule difference is at the rounding level of the panel; the returned
/// error is the sum of panel estimates.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol, int max_depth = 40);

}  // namespace vpdecay
