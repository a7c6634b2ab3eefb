#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "modcop/random.hpp"

namespace modcop {

/// Implementation interface for a probability density on [0, 1].
///
/// Implementations are immutable; every member is safe to call concurrently.
class GeneratorImpl {
 public:
  virtual ~GeneratorImpl() = default;

  virtual std::string id() const = 0;

  /// May return +infinity exactly at a declared singular point.
  virtual double density(double x) const = 0;

  /// Density at the real number anchor + offset. Implementations with
  /// singularities override this to use the offset at full precision.
  virtual double density_at(double anchor, double offset) const { return density(anchor + offset); }

  virtual double cdf(double x) const = 0;
  virtual double inverse_cdf(double p) const = 0;

  /// Points where the density diverges.
  virtual std::vector<double> singular_points() const { return {}; }

  /// Points where the density is not smooth: jumps, kinks and all singular
  /// points. Quadrature splits here.
  virtual std::vector<double> breakpoints() const { return singular_points(); }

  virtual bool supports_exact_cdf() const { return true; }

  /// One draw. The default is inverse-transform sampling.
  virtual double draw(CounterRng& rng) const { return inverse_cdf(rng.uniform()); }
};

/// A univariate density on [0, 1] used to generate a copula. Cheap to copy;
/// copies share the immutable implementation.
class Generator {
 public:
  explicit Generator(std::shared_ptr<const GeneratorImpl> impl);

  const std::string& id() const noexcept { return id_; }
  double density(double x) const { return impl_->density(x); }
  double density_at(double anchor, double offset) const { return impl_->density_at(anchor, offset); }
  double cdf(double x) const { return impl_->cdf(x); }
  double inverse_cdf(double p) const { return impl_->inverse_cdf(p); }
  const std::vector<double>& singular_points() const noexcept { return singular_; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  bool supports_exact_cdf() const { return impl_->supports_exact_cdf(); }
  double draw(CounterRng& rng) const { return impl_->draw(rng); }

  const GeneratorImpl& impl() const noexcept { return *impl_; }
  const std::shared_ptr<const GeneratorImpl>& shared_impl() const noexcept { return impl_; }

 private:
  std::shared_ptr<const GeneratorImpl> impl_;
  std::string id_;
  std::vector<double> singular_;
  std::vector<double> breakpoints_;  // sorted, unique, inside (0, 1)
};

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;
};

/// f = 1.
Generator uniform_generator();

/// Step density (2j - 1)/n on [(j-1)/n, j/n). Right-continuous; the last
/// step is closed. Throws DomainError for n = 0.
Generator piecewise_generator(std::size_t n);

/// f(x) = 2x, the pointwise limit of the step densities.
Generator triangular_generator();

/// Beta(alpha, beta). Throws DomainError unless both parameters are positive.
Generator beta_generator(BetaParams params);

/// n independent draws; draw i uses substream i of the seed.
std::vector<double> sample(const Generator& g, std::size_t n, std::uint64_t seed);

/// Regularized incomplete beta function I_x(a, b), by continued fraction.
double regularized_incomplete_beta(double x, double a, double b);

/// Inverts a continuous non-decreasing cdf on [0, 1]: safeguarded Newton
/// inside a bisection bracket. `density` may return 0 or infinity; those
/// steps fall back to bisection.
template <class Cdf, class Density>
double invert_monotone_cdf(double p, const Cdf& cdf, const Density& density, double lo = 0.0, double hi = 1.0);

}  // namespace modcop

#include "modcop/detail/invert.hpp"
