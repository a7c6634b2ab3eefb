#include "modcop/pathology.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "modcop/errors.hpp"
#include "modcop/numerics.hpp"

namespace modcop {

namespace {

void check_q(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("singular pair: q must lie in (0, 1)");
  }
}

inline double frac(double x) noexcept {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0x1.fffffffffffffp-1 : r;
}

// Both halves of a singular pair at distance d from its anchor, as (f+ + f-)/2.
inline double pair_density(double d) noexcept {
  if (d == 0.0) return 0.5;
  return 0.25 / std::sqrt(frac(d)) + 0.25 / std::sqrt(frac(-d));
}

// Closed-form cdf of the pair anchored at s, at u in [0, 1].
double pair_cdf(double s, double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double rq = std::sqrt(1.0 - s);
  const double rs = std::sqrt(s);
  double plus, minus;
  if (u < s) {
    plus = std::sqrt(u + (1.0 - s)) - rq;
    minus = rs - std::sqrt(s - u);
  } else {
    plus = 1.0 - rq + std::sqrt(u - s);
    minus = rs + 1.0 - std::sqrt(1.0 + s - u);
  }
  return std::clamp(0.5 * (plus + minus), 0.0, 1.0);
}

// Solves sqrt(a) - sqrt(1 - a) = c for a in [0, 1], |c| <= 1.
double solve_root_gap(double c) {
  c = std::clamp(c, -1.0, 1.0);
  const double x = 0.5 * (c + std::sqrt(2.0 - c * c));
  return std::clamp(x * x, 0.0, 1.0);
}

double pair_inverse_cdf(double s, double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double rq = std::sqrt(1.0 - s);
  const double rs = std::sqrt(s);
  const double at_anchor = 0.5 * (1.0 - rq + rs);
  double u;
  if (p < at_anchor) {
    u = solve_root_gap(2.0 * p + rq - rs) - (1.0 - s);
    u = std::clamp(u, 0.0, s);
  } else {
    u = s + solve_root_gap(2.0 * p - 2.0 + rq - rs);
    u = std::clamp(u, s, 1.0);
  }
  return u;
}

std::string format_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class SingularPairImpl final : public GeneratorImpl {
 public:
  SingularPairImpl(double q, std::string label) : q_(q), anchor_(singular_anchor(q)), label_(std::move(label)) {}

  std::string id() const override { return label_; }
  double density(double x) const override { return density_at(x, 0.0); }
  double density_at(double anchor, double offset) const override {
    return pair_density((anchor - anchor_) + offset);
  }
  double cdf(double x) const override { return pair_cdf(anchor_, x); }
  double inverse_cdf(double p) const override { return pair_inverse_cdf(anchor_, p); }
  std::vector<double> singular_points() const override { return {anchor_}; }

 private:
  double q_;
  double anchor_;
  std::string label_;
};

class PartialSumImpl final : public GeneratorImpl {
 public:
  PartialSumImpl(std::vector<PartialSumComponent> components, std::string label)
      : components_(std::move(components)), label_(std::move(label)) {
    double running = 0.0;
    for (const auto& c : components_) {
      running += std::max(c.weight, 0.0);
      cumulative_.push_back(running);
    }
  }

  std::string id() const override { return label_; }

  double density(double x) const override { return density_at(x, 0.0); }

  double density_at(double anchor, double offset) const override {
    CompensatedSum acc;
    for (const auto& c : components_) {
      acc += c.weight * pair_density((anchor - c.anchor) + offset);
    }
    return acc.value();
  }

  double cdf(double x) const override {
    CompensatedSum acc;
    for (const auto& c : components_) acc += c.weight * pair_cdf(c.anchor, x);
    return std::clamp(acc.value(), 0.0, 1.0);
  }

  double inverse_cdf(double p) const override {
    return invert_monotone_cdf(
        p, [this](double x) { return cdf(x); }, [this](double x) { return density(x); });
  }

  std::vector<double> singular_points() const override {
    std::vector<double> out;
    for (const auto& c : components_) out.push_back(c.anchor);
    std::sort(out.begin(), out.end());
    return out;
  }

  // Component selection, then the closed-form inverse of that component.
  double draw(CounterRng& rng) const override {
    const double pick = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), pick);
    if (it == cumulative_.end()) --it;
    const auto& c = components_[static_cast<std::size_t>(it - cumulative_.begin())];
    return pair_inverse_cdf(c.anchor, rng.uniform());
  }

 private:
  std::vector<PartialSumComponent> components_;
  std::vector<double> cumulative_;
  std::string label_;
};

class ExcisedImpl final : public GeneratorImpl {
 public:
  ExcisedImpl(Generator base, std::vector<double> excluded) : base_(std::move(base)), excluded_(std::move(excluded)) {
    std::sort(excluded_.begin(), excluded_.end());
    excluded_.erase(std::unique(excluded_.begin(), excluded_.end()), excluded_.end());
  }

  std::string id() const override { return base_.id() + "!excised"; }
  double density(double x) const override { return density_at(x, 0.0); }
  double density_at(double anchor, double offset) const override {
    double hi, lo;
    two_sum(anchor, offset, hi, lo);
    if (lo == 0.0 && std::binary_search(excluded_.begin(), excluded_.end(), hi)) return 0.0;
    return base_.density_at(anchor, offset);
  }
  double cdf(double x) const override { return base_.cdf(x); }
  double inverse_cdf(double p) const override { return base_.inverse_cdf(p); }
  std::vector<double> singular_points() const override { return base_.singular_points(); }
  std::vector<double> breakpoints() const override { return base_.breakpoints(); }
  bool supports_exact_cdf() const override { return base_.supports_exact_cdf(); }
  double draw(CounterRng& rng) const override { return base_.draw(rng); }

 private:
  Generator base_;
  std::vector<double> excluded_;
};

std::string rational_label(const Rational& q) {
  return std::to_string(q.num) + "/" + std::to_string(q.den);
}

}  // namespace

double singular_anchor(double q) {
  check_q(q);
  return 1.0 - q;
}

double f_q_plus(double q, double u) {
  const double d = u - singular_anchor(q);
  if (d == 0.0) return 0.5;
  return 0.5 / std::sqrt(frac(d));
}

double f_q_minus(double q, double u) {
  const double d = u - singular_anchor(q);
  if (d == 0.0) return 0.5;
  return 0.5 / std::sqrt(frac(-d));
}

Generator singular_pair(double q) {
  check_q(q);
  return Generator(std::make_shared<SingularPairImpl>(q, "pair:" + format_shortest(q)));
}

Generator singular_pair(Rational q) {
  if (q.den == 0 || q.num == 0 || q.num >= q.den) throw DomainError("singular pair: q must lie in (0, 1)");
  return Generator(std::make_shared<SingularPairImpl>(q.value(), "pair:" + rational_label(q)));
}

std::vector<Rational> enumerate_rationals(std::size_t n, EnumerationMode mode) {
  std::vector<Rational> out;
  out.reserve(n);
  if (mode == EnumerationMode::evenly_spaced) {
    for (std::size_t k = 1; k <= n; ++k) out.push_back({k, n + 1});
    return out;
  }
  // Calkin-Wilf: a/b -> b / (2 floor(a/b) b - a + b); every positive rational once.
  std::uint64_t a = 1, b = 1;
  while (out.size() < n) {
    const std::uint64_t k = a / b;
    const std::uint64_t next_den = 2 * k * b - a + b;
    a = b;
    b = next_den;
    if (a < b) out.push_back({a, b});
  }
  return out;
}

WeightScheme WeightScheme::zeta() {
  WeightScheme s;
  s.kind_ = Kind::zeta;
  return s;
}

WeightScheme WeightScheme::dyadic() {
  WeightScheme s;
  s.kind_ = Kind::dyadic;
  return s;
}

WeightScheme WeightScheme::geometric(double ratio, std::uint64_t permutation_seed) {
  if (!(ratio > 1.0) || !std::isfinite(ratio)) throw DomainError("geometric weights: ratio must exceed 1");
  WeightScheme s;
  s.kind_ = Kind::geometric;
  s.ratio_ = ratio;
  s.seed_ = permutation_seed;
  return s;
}

WeightScheme WeightScheme::custom(std::vector<double> weights) {
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("custom weights must be positive and finite");
  }
  WeightScheme s;
  s.kind_ = Kind::custom;
  s.custom_ = std::move(weights);
  return s;
}

std::string WeightScheme::name() const {
  switch (kind_) {
    case Kind::zeta:
      return "zeta";
    case Kind::dyadic:
      return "dyadic";
    case Kind::geometric:
      return "geom" + format_shortest(ratio_);
    case Kind::custom:
      return "custom";
  }
  return "unknown";
}

std::vector<double> WeightScheme::raw_weights(std::size_t n) const {
  std::vector<double> w(n);
  switch (kind_) {
    case Kind::zeta:
      for (std::size_t k = 1; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        w[k - 1] = 6.0 / (std::numbers::pi * std::numbers::pi * kk * kk);
      }
      break;
    case Kind::dyadic:
      for (std::size_t k = 1; k <= n; ++k) w[k - 1] = std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(k, 2000)));
      break;
    case Kind::geometric: {
      const auto perm = seeded_permutation(n, seed_);
      const double log_ratio = std::log(ratio_);
      for (std::size_t k = 0; k < n; ++k) w[k] = std::exp(-static_cast<double>(perm[k]) * log_ratio);
      break;
    }
    case Kind::custom:
      if (n > custom_.size()) throw DomainError("custom weights: fewer weights than terms");
      std::copy_n(custom_.begin(), n, w.begin());
      break;
  }
  return w;
}

std::vector<double> WeightScheme::normalized_weights(std::size_t n) const {
  auto w = raw_weights(n);
  CompensatedSum total;
  for (double x : w) total += x;
  const double t = total.value();
  for (double& x : w) x /= t;
  return w;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t k = 0; k < n; ++k) perm[k] = k + 1;
  CounterRng rng(seed, 0);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

PartialSum::PartialSum(std::size_t terms, EnumerationMode mode, WeightScheme scheme) : mode_(mode) {
  if (terms == 0) throw DomainError("partial sum: need at least one term");
  const auto qs = enumerate_rationals(terms, mode);
  const auto w = scheme.normalized_weights(terms);
  components_.reserve(terms);
  for (std::size_t k = 0; k < terms; ++k) {
    components_.push_back({qs[k], singular_anchor(qs[k].value()), w[k]});
  }
  std::ostringstream label;
  label << "pathology:" << terms << "," << to_string(mode) << "," << scheme.name();
  if (scheme.kind() == WeightScheme::Kind::geometric) label << "," << scheme.permutation_seed();
  id_ = label.str();
}

PartialSum::PartialSum(std::vector<PartialSumComponent> components, std::string id)
    : components_(std::move(components)), id_(std::move(id)) {
  if (components_.empty()) throw DomainError("partial sum: need at least one term");
  for (auto& c : components_) {
    c.anchor = singular_anchor(c.q.value());
  }
}

Generator PartialSum::generator() const {
  return Generator(std::make_shared<PartialSumImpl>(components_, id_));
}

PartialSum partial_sum_generator(std::size_t n, EnumerationMode mode, const WeightScheme& scheme) {
  return PartialSum(n, mode, scheme);
}

Generator indicator_excision(const Generator& g, std::vector<double> excluded) {
  return Generator(std::make_shared<ExcisedImpl>(g, std::move(excluded)));
}

namespace {

// Index (0-based) of an evenly spaced rational k/(n+1) whose anchor 1 - k/(n+1)
// lies in (a, b), preferring the one nearest the middle of the interval.
std::optional<std::size_t> evenly_spaced_hit(std::size_t n, double a, double b) {
  const double den = static_cast<double>(n + 1);
  std::optional<std::size_t> best;
  double best_gap = std::numeric_limits<double>::infinity();
  const double mid = 0.5 * (a + b);
  const auto k_lo = static_cast<std::size_t>(std::max(1.0, std::floor((1.0 - b) * den)));
  const auto k_hi = static_cast<std::size_t>(std::min(static_cast<double>(n), std::ceil((1.0 - a) * den)));
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    const double s = singular_anchor(static_cast<double>(k) / den);
    if (s > a && s < b && std::abs(s - mid) < best_gap) {
      best_gap = std::abs(s - mid);
      best = k - 1;
    }
  }
  return best;
}

}  // namespace

UnboundednessWitness unboundedness_probe(double a, double b, double threshold, const ProbeOptions& options) {
  if (!(a < b) || a < 0.0 || b > 1.0) throw DomainError("unboundedness_probe: need 0 <= a < b <= 1");
  if (!(threshold > 0.0) || !std::isfinite(threshold)) throw DomainError("unboundedness_probe: threshold must be positive");

  std::size_t terms = 0;
  std::size_t component = 0;
  if (options.mode == EnumerationMode::evenly_spaced) {
    for (std::size_t n = 1; n <= options.max_terms; ++n) {
      if (auto hit = evenly_spaced_hit(n, a, b)) {
        terms = n;
        component = *hit;
        break;
      }
    }
  } else {
    std::uint64_t p = 1, q = 1;
    std::size_t count = 0;
    while (count < options.max_terms) {
      const std::uint64_t k = p / q;
      const std::uint64_t next_den = 2 * k * q - p + q;
      p = q;
      q = next_den;
      if (p >= q) continue;
      ++count;
      const double s = singular_anchor(static_cast<double>(p) / static_cast<double>(q));
      if (s > a && s < b) {
        terms = count;
        component = count - 1;
        break;
      }
    }
  }
  if (terms == 0) {
    throw BudgetError("unboundedness_probe: no singular point in the interval within " +
                      std::to_string(options.max_terms) + " terms");
  }

  const PartialSum sum(terms, options.mode, options.scheme);
  const Generator h = sum.generator();
  const PartialSumComponent& target = sum.components()[component];

  UnboundednessWitness w;
  w.terms = terms;
  w.component = component;
  w.q = target.q;
  w.singular_point = target.anchor;
  double eps = 0.5 * (b - target.anchor);
  for (std::size_t it = 1; it <= options.max_iterations && eps > 0.0; ++it, eps *= 0.5) {
    bool on_singularity = false;
    for (const auto& c : sum.components()) {
      if ((target.anchor - c.anchor) + eps == 0.0) on_singularity = true;
    }
    if (on_singularity) continue;
    const double value = h.density_at(target.anchor, eps);
    if (std::isfinite(value) && value > threshold) {
      w.offset = eps;
      w.x = target.anchor + eps;
      w.value = value;
      w.iterations = it;
      return w;
    }
  }
  throw BudgetError("unboundedness_probe: threshold not exceeded within the iteration budget");
}

std::vector<double> witness_copula_point(const UnboundednessWitness& w, int dim) {
  if (dim < 2) throw DomainError("witness_copula_point: dimension must be at least 2");
  std::vector<double> u(static_cast<std::size_t>(dim), 0.0);
  u[0] = w.singular_point;
  u[1] = w.offset;
  return u;
}

std::string to_string(EnumerationMode mode) {
  return mode == EnumerationMode::diagonal ? "diagonal" : "evenly";
}

std::optional<EnumerationMode> parse_enumeration_mode(const std::string& text) {
  if (text == "diagonal") return EnumerationMode::diagonal;
  if (text == "evenly" || text == "evenly_spaced") return EnumerationMode::evenly_spaced;
  return std::nullopt;
}

}  // namespace modcop
