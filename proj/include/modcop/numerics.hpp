#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace modcop {

/// Fractional part x - floor(x), always in [0, 1).
struct Mod1Value {
  double value = 0.0;
};

/// Throws DomainError for non-finite input. Integers map to 0. A negative
/// input so close to an integer that the fractional part rounds to 1.0
/// yields the largest double below 1.
Mod1Value mod1(double x);

/// A real number carried as anchor + offset, where the offset may be far
/// below the resolution of the anchor. Used to evaluate densities close to
/// their singular points without losing the distance to the singularity.
struct SplitReal {
  double anchor = 0.0;
  double offset = 0.0;
};

/// Error-free transformation: a + b == s + e exactly.
inline void two_sum(double a, double b, double& s, double& e) noexcept {
  s = a + b;
  const double bb = s - a;
  e = (a - (s - bb)) + (b - bb);
}

/// Sum of doubles carried as a double-double.
SplitReal compensated_total(std::span<const double> terms);

/// Reduces anchor + offset modulo 1 so that the anchor lies in [0, 1].
/// An anchor of exactly 1 is kept when the offset is negative so that the
/// offset still measures the distance to 1.
SplitReal mod1(SplitReal x);

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + correction_; }

 private:
  double sum_ = 0.0;
  double correction_ = 0.0;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

using Integrand = std::function<double(double)>;

/// Integrand evaluated at anchor + offset, where the anchor is the nearer
/// endpoint of the current subinterval. Lets integrands with endpoint
/// singularities see the exact distance to the singular point.
using AnchoredIntegrand = std::function<double(double anchor, double offset)>;

/// Tanh-sinh quadrature over [a, b], split at every listed point that lies
/// strictly inside. Throws ConvergenceError (carrying the best estimate)
/// when some subinterval misses its share of the tolerance.
QuadratureResult integrate_1d(const Integrand& f, double a, double b, double tol,
                              std::span<const double> singularities = {});

QuadratureResult integrate_1d_anchored(const AnchoredIntegrand& f, double a, double b, double tol,
                                       std::span<const double> singularities = {});

/// Density of S = V_1 + ... + V_m with V_k ~ Uniform[0, u_k] independent,
/// evaluated by inclusion-exclusion over the 2^m corners of the box.
class BoxSumDensity {
 public:
  static constexpr std::size_t kMaxEdges = 12;

  /// Throws DegenerateInputError for a zero-length edge and DomainError for
  /// edges outside (0, 1], an empty list, or more than kMaxEdges edges.
  explicit BoxSumDensity(std::vector<double> edge_lengths);

  /// p_S(s); zero outside [0, sum of edges].
  double operator()(double s) const;

  /// (prod u_k) * p_S(s): the (m-1)-volume of the slice {v in box : sum v = s}
  /// scaled so that integrating it over s gives the box volume.
  double volume_weight(double s) const;

  std::span<const double> edge_lengths() const noexcept { return edges_; }
  /// Distinct subset sums of the edges, where p_S changes polynomial piece.
  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  double support_end() const noexcept { return total_; }
  double box_volume() const noexcept { return volume_; }

 private:
  std::vector<double> edges_;
  std::vector<double> corner_sums_;
  std::vector<signed char> corner_signs_;
  std::vector<double> breakpoints_;
  double total_ = 0.0;
  double volume_ = 1.0;
  double inv_factorial_ = 1.0;
};

struct MonteCarloOptions {
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Plain Monte Carlo over the box [lower, upper]. Sample i draws from
/// substream i of the seed, and partial sums are merged in a fixed block
/// order, so the result does not depend on the thread count.
QuadratureResult mc_integrate(const std::function<double(std::span<const double>)>& f,
                              std::span<const double> lower, std::span<const double> upper,
                              const MonteCarloOptions& options);

}  // namespace modcop
