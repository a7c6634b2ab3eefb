#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "modcop/generators.hpp"
#include "modcop/numerics.hpp"

namespace modcop {

/// The copula with density c(u) = f((sum_j (-1)^{s_j} u_j) mod 1) on [0,1]^d.
///
/// All-zero signs give the exchangeable family; a sign of 1 reflects that
/// coordinate. Immutable and safe to share across threads.
class CopulaModel {
 public:
  /// Throws DomainError if dimension < 2 or signs has the wrong length or
  /// entries other than 0/1. Empty signs mean all zero.
  CopulaModel(int dimension, Generator generator, std::vector<int> signs = {});

  int dimension() const noexcept { return dimension_; }
  const Generator& generator() const noexcept { return generator_; }
  const std::vector<int>& signs() const noexcept { return signs_; }
  bool is_signed() const noexcept { return signed_; }
  std::string id() const;

 private:
  int dimension_;
  Generator generator_;
  std::vector<int> signs_;
  bool signed_ = false;
};

/// Copula density at u. May be +infinity where the generator diverges.
/// The signed coordinate sum is formed without rounding error, so points
/// within a rounding error of a singular hyperplane keep their distance.
double density(const CopulaModel& m, std::span<const double> u);

/// Copula density at the point whose signed coordinate sum is anchor + offset.
double density_from_sum(const CopulaModel& m, SplitReal signed_sum);

enum class CdfMethod { automatic, exact, monte_carlo };

struct CdfOptions {
  CdfMethod method = CdfMethod::automatic;
  double tolerance = 1e-12;
  std::size_t mc_samples = 200000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct CdfResult {
  double value = 0.0;
  double error_estimate = 0.0;
  CdfMethod method = CdfMethod::exact;
};

/// Largest dimension the automatic method evaluates by 1-d reduction.
inline constexpr int kExactCdfMaxDimension = 8;

/// C(u). The exact method reduces the d-dimensional integral to one
/// dimension against the box-sum density; signed models are expanded by
/// inclusion-exclusion over reflected unsigned cdfs. Grounded: returns
/// exactly 0 when a coordinate is 0.
CdfResult cdf(const CopulaModel& m, std::span<const double> u, const CdfOptions& options = {});

/// dC/du_j (0-based j). Throws BoundaryError unless 0 < u_j < 1.
double partial_derivative(const CopulaModel& m, std::span<const double> u, int j, double tolerance = 1e-12);

/// d^2 C / du_i du_j (0-based). Needs d >= 3; throws
/// UnsupportedDimensionError for d = 2 and BoundaryError unless u_i, u_j are
/// interior. For i = j the partner coordinate is the smallest index != i.
double second_partial(const CopulaModel& m, std::span<const double> u, int i, int j, double tolerance = 1e-12);

/// Integral of c over the box [0, edges] shifted: for edges u_K and shift s,
/// returns int_{[0,u_K]} f((s + sum v) mod 1) dv. The common kernel behind
/// the cdf and both derivative orders.
QuadratureResult reduced_integral(const Generator& g, double shift, std::span<const double> edges, double tolerance);

/// n x d points in [0,1]^d, row-major.
struct SampleMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::string model_id;

  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
  std::vector<double> column(std::size_t c) const;
};

/// Draws rows from the copula: d-1 independent uniforms, a generator draw X,
/// and a closing coordinate (X - sum) mod 1; sign-1 slots are then
/// reflected. Row r uses substream r, so output does not depend on threads.
SampleMatrix sample_copula(const CopulaModel& m, std::size_t n, std::uint64_t seed, unsigned threads = 1);

/// Density of the bivariate checkerboard copula, 2 on [0,1/2]^2 and [1/2,1]^2.
double checkerboard_density(std::span<const double> u);

}  // namespace modcop
