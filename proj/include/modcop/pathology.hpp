#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "modcop/generators.hpp"

namespace modcop {

/// A rational number num/den in (0, 1).
struct Rational {
  std::uint64_t num = 1;
  std::uint64_t den = 2;

  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// The point where f_q^+ and f_q^- diverge, 1 - q rounded to double. The
/// singular pair densities are evaluated relative to this anchor, so the
/// divergence sits exactly on a representable point.
double singular_anchor(double q);

/// f_q^+(u) = 1 / (2 sqrt((u + q) mod 1)), and 1/2 at u = 1 - q.
/// Throws DomainError unless 0 < q < 1.
double f_q_plus(double q, double u);

/// f_q^-(u) = 1 / (2 sqrt((-(u + q)) mod 1)), and 1/2 at u = 1 - q.
double f_q_minus(double q, double u);

/// The density f_q = (f_q^+ + f_q^-)/2 with closed-form cdf and inverse.
Generator singular_pair(double q);
Generator singular_pair(Rational q);

enum class EnumerationMode {
  diagonal,       ///< Calkin-Wilf order restricted to (0, 1): 1/2, 1/3, 2/3, 1/4, 3/5, ...
  evenly_spaced,  ///< k/(n+1) for k = 1..n
};

std::vector<Rational> enumerate_rationals(std::size_t n, EnumerationMode mode);

/// Positive weights indexed by enumeration position (1-based).
class WeightScheme {
 public:
  enum class Kind { zeta, dyadic, geometric, custom };

  /// 6 / (pi^2 k^2); sums to 1 over all k.
  static WeightScheme zeta();
  /// 2^-k; sums to 1 over all k.
  static WeightScheme dyadic();
  /// ratio^-pi(k) for a seeded random permutation pi of 1..n.
  static WeightScheme geometric(double ratio, std::uint64_t permutation_seed);
  /// Explicit weights; must all be positive.
  static WeightScheme custom(std::vector<double> weights);

  Kind kind() const noexcept { return kind_; }
  double ratio() const noexcept { return ratio_; }
  std::uint64_t permutation_seed() const noexcept { return seed_; }
  std::string name() const;

  /// The first n weights before renormalization.
  std::vector<double> raw_weights(std::size_t n) const;

  /// The first n weights rescaled to sum to 1.
  std::vector<double> normalized_weights(std::size_t n) const;

 private:
  Kind kind_ = Kind::zeta;
  double ratio_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<double> custom_;
};

/// Seeded Fisher-Yates permutation of 1..n.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

struct PartialSumComponent {
  Rational q;
  double anchor = 0.0;  ///< singular point, singular_anchor(q)
  double weight = 0.0;  ///< renormalized
};

/// The truncated mixture h_n = sum_k w_k f_{q_k}.
class PartialSum {
 public:
  PartialSum(std::size_t terms, EnumerationMode mode, WeightScheme scheme);

  /// Mixture from explicit components. Weights are used as given, which
  /// permits deliberately broken (e.g. negated) weights in self-tests.
  explicit PartialSum(std::vector<PartialSumComponent> components, std::string id = "pathology:custom");

  std::size_t terms() const noexcept { return components_.size(); }
  const std::vector<PartialSumComponent>& components() const noexcept { return components_; }
  EnumerationMode mode() const noexcept { return mode_; }
  const std::string& id() const noexcept { return id_; }

  Generator generator() const;

 private:
  std::vector<PartialSumComponent> components_;
  EnumerationMode mode_ = EnumerationMode::evenly_spaced;
  std::string id_;
};

PartialSum partial_sum_generator(std::size_t n, EnumerationMode mode, const WeightScheme& scheme);

/// Zeroes the density on a finite set of points; everything else is unchanged.
Generator indicator_excision(const Generator& g, std::vector<double> excluded);

struct UnboundednessWitness {
  std::size_t terms = 0;       ///< smallest n whose partial sum has a singularity in the interval
  std::size_t component = 0;   ///< index of that singularity within the enumeration
  Rational q;
  double singular_point = 0.0;
  double offset = 0.0;         ///< witness x = singular_point + offset, exactly
  double x = 0.0;              ///< singular_point + offset rounded to double
  double value = 0.0;          ///< h_n(x), finite
  std::size_t iterations = 0;
};

struct ProbeOptions {
  EnumerationMode mode = EnumerationMode::evenly_spaced;
  WeightScheme scheme = WeightScheme::geometric(1.1, 42);
  std::size_t max_terms = 100000;
  std::size_t max_iterations = 4000;
};

/// Finds the first partial sum with a singular point in (a, b) and walks
/// geometrically toward that point until the density exceeds `threshold`.
/// Throws BudgetError if either search runs out.
UnboundednessWitness unboundedness_probe(double a, double b, double threshold, const ProbeOptions& options = {});

/// A copula point u in [0,1]^dim whose coordinate sum equals the witness
/// point exactly: u = (singular_point, offset, 0, ..., 0).
std::vector<double> witness_copula_point(const UnboundednessWitness& w, int dim);

std::string to_string(EnumerationMode mode);
std::optional<EnumerationMode> parse_enumeration_mode(const std::string& text);

}  // namespace modcop
