#include "modcop/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "modcop/errors.hpp"
#include "modcop/numerics.hpp"

namespace modcop {

std::vector<std::size_t> ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<std::size_t> r(x.size());
  for (std::size_t k = 0; k < order.size(); ++k) r[order[k]] = k + 1;
  return r;
}

EmpiricalCopula::EmpiricalCopula(const SampleMatrix& data) : n_(data.rows), d_(data.cols) {
  if (n_ == 0 || d_ == 0) throw DomainError("empirical copula: empty data");
  ranks_.resize(n_ * d_);
  for (std::size_t c = 0; c < d_; ++c) {
    const auto col = data.column(c);
    const auto r = ranks(col);
    for (std::size_t k = 0; k < n_; ++k) ranks_[k * d_ + c] = r[k];
  }
}

double EmpiricalCopula::operator()(std::span<const double> u) const {
  if (u.size() != d_) throw DomainError("empirical copula: point dimension mismatch");
  const double n = static_cast<double>(n_);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n_; ++k) {
    bool inside = true;
    for (std::size_t c = 0; c < d_ && inside; ++c) {
      inside = static_cast<double>(ranks_[k * d_ + c]) <= n * u[c];
    }
    hits += inside ? 1 : 0;
  }
  return static_cast<double>(hits) / n;
}

double generator_moment(const Generator& g, int k, double tolerance) {
  if (k < 0) throw DomainError("generator_moment: order must be non-negative");
  auto integrand = [&](double anchor, double offset) {
    const double f = g.density_at(anchor, offset);
    if (f == 0.0) return 0.0;
    const double x = anchor + offset;
    double power = 1.0;
    for (int e = 0; e < k; ++e) power *= x;
    return f * power;
  };
  return integrate_1d_anchored(integrand, 0.0, 1.0, tolerance, g.breakpoints()).value;
}

double spearman_rho_closed_form(const Generator& g, double tolerance) {
  auto integrand = [&](double anchor, double offset) {
    const double f = g.density_at(anchor, offset);
    if (f == 0.0) return 0.0;
    const double x = anchor + offset;
    const double xc = (1.0 - anchor) - offset;
    return f * x * xc;
  };
  const double e = integrate_1d_anchored(integrand, 0.0, 1.0, tolerance, g.breakpoints()).value;
  return 6.0 * e - 1.0;
}

RhoResult spearman_rho_sample(const SampleMatrix& data, std::size_t i, std::size_t j) {
  if (i >= data.cols || j >= data.cols) throw DomainError("spearman_rho_sample: column index out of range");
  if (data.rows < 3) throw DomainError("spearman_rho_sample: need at least 3 rows");
  const auto x = data.column(i);
  const auto y = data.column(j);
  auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
  };
  if (constant(x) || constant(y)) throw UndefinedCorrelationError("spearman_rho_sample: constant column");

  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(data.rows);
  const double mean = (n + 1.0) / 2.0;
  CompensatedSum sxy, sxx, syy;
  for (std::size_t k = 0; k < data.rows; ++k) {
    const double a = static_cast<double>(rx[k]) - mean;
    const double b = static_cast<double>(ry[k]) - mean;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  RhoResult r;
  r.value = std::clamp(sxy.value() / std::sqrt(sxx.value() * syy.value()), -1.0, 1.0);
  r.standard_error = 1.0 / std::sqrt(n - 1.0);
  return r;
}

namespace {

// Counts inversions of v while merge-sorting it.
std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& buffer, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = merge_count(v, buffer, lo, mid) + merge_count(v, buffer, mid, hi);
  std::size_t a = lo, b = mid, out = lo;
  while (a < mid && b < hi) {
    if (v[b] < v[a]) {
      swaps += mid - a;
      buffer[out++] = v[b++];
    } else {
      buffer[out++] = v[a++];
    }
  }
  while (a < mid) buffer[out++] = v[a++];
  while (b < hi) buffer[out++] = v[b++];
  std::copy(buffer.begin() + static_cast<std::ptrdiff_t>(lo), buffer.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

// Pairs tied within runs of equal values of a sorted sequence.
template <class Eq>
std::uint64_t tied_pairs(std::size_t n, Eq eq) {
  std::uint64_t total = 0;
  std::size_t run = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    if (k < n && eq(k - 1, k)) {
      ++run;
    } else {
      total += static_cast<std::uint64_t>(run) * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("kendall_tau: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw DomainError("kendall_tau: need at least 2 observations");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  std::vector<double> xs(n), ys(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = x[order[k]];
    ys[k] = y[order[k]];
  }
  const std::uint64_t tie_x = tied_pairs(n, [&](std::size_t a, std::size_t b) { return xs[a] == xs[b]; });
  const std::uint64_t tie_xy =
      tied_pairs(n, [&](std::size_t a, std::size_t b) { return xs[a] == xs[b] && ys[a] == ys[b]; });
  std::vector<double> buffer(n);
  const std::uint64_t swaps = merge_count(ys, buffer, 0, n);
  const std::uint64_t tie_y = tied_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  // concordant - discordant = pairs - tie_x - tie_y + tie_xy - 2 * swaps
  const double numerator = pairs - static_cast<double>(tie_x) - static_cast<double>(tie_y) +
                           static_cast<double>(tie_xy) - 2.0 * static_cast<double>(swaps);
  return numerator / pairs;
}

double kendall_tau_sample(const SampleMatrix& data, std::size_t i, std::size_t j) {
  if (i >= data.cols || j >= data.cols) throw DomainError("kendall_tau_sample: column index out of range");
  return kendall_tau(data.column(i), data.column(j));
}

std::vector<TailPoint> tail_diagnostic(const CopulaModel& m, std::span<const double> t_values) {
  const int d = m.dimension();
  double factorial = 1.0;
  for (int k = 2; k < d; ++k) factorial *= k;
  const double scale = std::pow(static_cast<double>(d), d - 1) / factorial;
  std::vector<TailPoint> out;
  for (double t : t_values) {
    if (!(t > 0.0 && t <= 1.0 / d)) throw DomainError("tail_diagnostic: t must lie in (0, 1/d]");
    const std::vector<double> u(static_cast<std::size_t>(d), t);
    TailPoint p;
    p.t = t;
    p.ratio = cdf(m, u).value / std::pow(t, d - 1);
    p.bound = scale * m.generator().cdf(t * d);
    out.push_back(p);
  }
  return out;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.0) {
    // Theta-function form, which converges fast for small lambda.
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * c);
      s += term;
      if (term < 1e-18) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += sign * term;
    sign = -sign;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult ks_uniformity(std::span<const double> sample) {
  if (sample.size() < 10) throw DomainError("ks_uniformity: need at least 10 observations");
  std::vector<double> v(sample.begin(), sample.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double x = std::clamp(v[k], 0.0, 1.0);
    d = std::max({d, static_cast<double>(k + 1) / n - x, x - static_cast<double>(k) / n});
  }
  const double rn = std::sqrt(n);
  return {d, kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d)};
}

ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> expected, int fitted) {
  if (observed.size() != expected.size() || observed.empty()) throw DomainError("chi_square_gof: size mismatch");
  CompensatedSum stat;
  std::size_t cells = 0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    if (expected[k] <= 0.0) {
      if (observed[k] > 0.0) return {std::numeric_limits<double>::infinity(), 0.0, 0.0};
      continue;
    }
    const double diff = observed[k] - expected[k];
    stat += diff * diff / expected[k];
    ++cells;
  }
  const double dof = static_cast<double>(cells) - 1.0 - fitted;
  if (dof < 1.0) throw DomainError("chi_square_gof: no degrees of freedom left");
  ChiSquareResult r;
  r.statistic = stat.value();
  r.dof = dof;
  r.p_value = boost::math::gamma_q(dof / 2.0, r.statistic / 2.0);
  return r;
}

}  // namespace modcop
