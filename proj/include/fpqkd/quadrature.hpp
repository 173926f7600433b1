#pragma once

#include <functional>
#include <span>
#include <vector>

namespace fpqkd {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]. Rules are computed once by Newton
/// iteration on the Legendre recurrence and cached; thread-safe.
const GaussLegendreRule& gauss_legendre(int n);

/// Map a cached rule onto [a, b], appending scaled nodes/weights.
void gauss_legendre_on(int n, double a, double b,
                       std::vector<double>& x, std::vector<double>& w);

struct BrentResult {
  double x;
  double value;
};

/// Bounded scalar minimization (Brent). `rel_tol` applies to the abscissa.
BrentResult brent_minimize(const std::function<double(double)>& f,
                           double lo, double hi, double rel_tol = 1e-12);

}  // namespace fpqkd
