#include "modcop/generators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "modcop/errors.hpp"

namespace modcop {

namespace {

std::string format_shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class UniformImpl final : public GeneratorImpl {
 public:
  std::string id() const override { return "uniform"; }
  double density(double x) const override { return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0; }
  double cdf(double x) const override { return std::clamp(x, 0.0, 1.0); }
  double inverse_cdf(double p) const override { return std::clamp(p, 0.0, 1.0); }
};

class PiecewiseImpl final : public GeneratorImpl {
 public:
  explicit PiecewiseImpl(std::size_t n) : n_(n), scale_(static_cast<double>(n)) {}

  std::string id() const override { return "piecewise:" + std::to_string(n_); }

  double density(double x) const override {
    if (!(x >= 0.0 && x <= 1.0)) return 0.0;
    return (2.0 * static_cast<double>(step_of(x)) - 1.0) / scale_;
  }

  double cdf(double x) const override {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double j = static_cast<double>(step_of(x));
    const double left = (j - 1.0) / scale_;
    return (j - 1.0) * (j - 1.0) / (scale_ * scale_) + (2.0 * j - 1.0) / scale_ * (x - left);
  }

  double inverse_cdf(double p) const override {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    // cdf(j/n) = j^2/n^2, so the step holding p is ceil(n sqrt(p)).
    double j = std::ceil(scale_ * std::sqrt(p));
    j = std::clamp(j, 1.0, scale_);
    const double base = (j - 1.0) * (j - 1.0) / (scale_ * scale_);
    if (p < base && j > 1.0) {
      j -= 1.0;
    }
    const double below = (j - 1.0) * (j - 1.0) / (scale_ * scale_);
    const double x = (j - 1.0) / scale_ + (p - below) * scale_ / (2.0 * j - 1.0);
    return std::clamp(x, (j - 1.0) / scale_, j / scale_);
  }

  std::vector<double> breakpoints() const override {
    std::vector<double> out;
    for (std::size_t j = 1; j < n_; ++j) out.push_back(static_cast<double>(j) / scale_);
    return out;
  }

 private:
  std::size_t step_of(double x) const {
    const auto j = static_cast<std::size_t>(std::floor(x * scale_)) + 1;
    return std::min(j, n_);
  }

  std::size_t n_;
  double scale_;
};

class TriangularImpl final : public GeneratorImpl {
 public:
  std::string id() const override { return "triangular"; }
  double density(double x) const override { return (x >= 0.0 && x <= 1.0) ? 2.0 * x : 0.0; }
  double cdf(double x) const override {
    const double c = std::clamp(x, 0.0, 1.0);
    return c * c;
  }
  double inverse_cdf(double p) const override { return std::sqrt(std::clamp(p, 0.0, 1.0)); }
};

class BetaImpl final : public GeneratorImpl {
 public:
  explicit BetaImpl(BetaParams p)
      : a_(p.alpha), b_(p.beta), log_norm_(std::lgamma(p.alpha) + std::lgamma(p.beta) - std::lgamma(p.alpha + p.beta)) {}

  std::string id() const override { return "beta:" + format_shortest(a_) + "," + format_shortest(b_); }

  double density(double x) const override { return pdf(x, 1.0 - x); }

  double density_at(double anchor, double offset) const override {
    return pdf(anchor + offset, (1.0 - anchor) - offset);
  }

  double cdf(double x) const override { return regularized_incomplete_beta(x, a_, b_); }

  double inverse_cdf(double p) const override {
    return invert_monotone_cdf(
        p, [this](double x) { return cdf(x); }, [this](double x) { return density(x); });
  }

  std::vector<double> singular_points() const override {
    std::vector<double> out;
    if (a_ < 1.0) out.push_back(0.0);
    if (b_ < 1.0) out.push_back(1.0);
    return out;
  }

 private:
  // x and its complement are passed separately so either can be tiny.
  double pdf(double x, double xc) const {
    if (x < 0.0 || xc < 0.0) return 0.0;
    if (x == 0.0) return edge_value(a_, xc, b_);
    if (xc == 0.0) return edge_value(b_, x, a_);
    return std::exp((a_ - 1.0) * std::log(x) + (b_ - 1.0) * std::log(xc) - log_norm_);
  }

  // Density where one argument is exactly zero: `shape` is that argument's exponent.
  double edge_value(double shape, double other, double other_shape) const {
    if (shape < 1.0) return std::numeric_limits<double>::infinity();
    if (shape > 1.0) return 0.0;
    return std::exp((other_shape - 1.0) * std::log(other) - log_norm_);
  }

  double a_;
  double b_;
  double log_norm_;
};

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw ConvergenceError("regularized_incomplete_beta: continued fraction did not converge", h, 0.0);
}

}  // namespace

Generator::Generator(std::shared_ptr<const GeneratorImpl> impl) : impl_(std::move(impl)) {
  if (!impl_) throw DomainError("Generator: null implementation");
  id_ = impl_->id();
  singular_ = impl_->singular_points();
  for (double b : impl_->breakpoints()) {
    if (b > 0.0 && b < 1.0) breakpoints_.push_back(b);
  }
  for (double s : singular_) {
    if (s > 0.0 && s < 1.0) breakpoints_.push_back(s);
  }
  std::sort(breakpoints_.begin(), breakpoints_.end());
  breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
}

Generator uniform_generator() {
  return Generator(std::make_shared<UniformImpl>());
}

Generator piecewise_generator(std::size_t n) {
  if (n == 0) throw DomainError("piecewise_generator: n must be at least 1");
  return Generator(std::make_shared<PiecewiseImpl>(n));
}

Generator triangular_generator() {
  return Generator(std::make_shared<TriangularImpl>());
}

Generator beta_generator(BetaParams params) {
  if (!(params.alpha > 0.0) || !std::isfinite(params.alpha)) {
    throw DomainError("beta_generator: alpha must be > 0 (got " + format_shortest(params.alpha) + ")");
  }
  if (!(params.beta > 0.0) || !std::isfinite(params.beta)) {
    throw DomainError("beta_generator: beta must be > 0 (got " + format_shortest(params.beta) + ")");
  }
  return Generator(std::make_shared<BetaImpl>(params));
}

std::vector<double> sample(const Generator& g, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sample: n must be at least 1");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(seed, i);
    out[i] = g.draw(rng);
  }
  return out;
}

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("regularized_incomplete_beta: parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      a * std::log(x) + b * std::log1p(-x) - (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

}  // namespace modcop
