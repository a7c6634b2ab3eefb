#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace modcop {

template <class Cdf, class Density>
double invert_monotone_cdf(double p, const Cdf& cdf, const Density& density, double lo, double hi) {
  if (!(p > 0.0)) return lo;
  if (!(p < 1.0)) return hi;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double x = 0.5 * (lo + hi);
  double step_old = hi - lo;
  double step = step_old;
  for (int iter = 0; iter < 4000; ++iter) {
    const double residual = cdf(x) - p;
    if (residual == 0.0) return x;
    if (residual < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= 2.0 * eps * std::max(std::abs(lo), std::abs(hi)) || hi - lo < 1e-300) {
      return 0.5 * (lo + hi);
    }
    const double slope = density(x);
    const double newton = x - residual / slope;
    // Newton when it stays inside the bracket and shrinks faster than bisection.
    const bool use_newton = slope > 0.0 && std::isfinite(slope) && newton > lo && newton < hi &&
                            std::abs(2.0 * residual) <= std::abs(step_old * slope);
    step_old = step;
    const double next = use_newton ? newton : 0.5 * (lo + hi);
    step = next - x;
    if (std::abs(step) <= eps * std::abs(x)) return next;
    x = next;
  }
  return x;
}

}  // namespace modcop
