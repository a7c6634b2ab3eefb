#include "modcop/numerics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "modcop/errors.hpp"
#include "modcop/random.hpp"

namespace modcop {

Mod1Value mod1(double x) {
  if (!std::isfinite(x)) {
    throw DomainError("mod1: input must be finite");
  }
  double r = x - std::floor(x);
  if (r >= 1.0) {
    r = std::nextafter(1.0, 0.0);
  }
  return {r};
}

SplitReal compensated_total(std::span<const double> terms) {
  double hi = 0.0;
  double lo = 0.0;
  for (double t : terms) {
    double err;
    two_sum(hi, t, hi, err);
    lo += err;
  }
  SplitReal out;
  two_sum(hi, lo, out.anchor, out.offset);
  return out;
}

SplitReal mod1(SplitReal x) {
  if (!std::isfinite(x.anchor) || !std::isfinite(x.offset)) {
    throw DomainError("mod1: input must be finite");
  }
  double hi, lo;
  two_sum(x.anchor, x.offset, hi, lo);
  double a = hi - std::floor(hi);
  if (a == 0.0 && lo < 0.0) {
    a = 1.0;
  }
  return {a, lo};
}

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    correction_ += (sum_ - t) + x;
  } else {
    correction_ += (x - t) + sum_;
  }
  sum_ = t;
}

// ---------------------------------------------------------------------------
// Tanh-sinh quadrature

namespace {

struct Node {
  double t;
  double dist;    // distance from the nearer endpoint, in units of the half-length
  double weight;  // includes the Jacobian, excludes the step and the half-length
};

constexpr int kMaxLevel = 10;
constexpr int kMinLevel = 2;
constexpr double kMaxT = 6.0;
constexpr double kPruneRelative = 1e-22;
constexpr double kPruneStartT = 3.0;

struct NodeTable {
  double center_weight = std::numbers::pi / 2.0;
  std::vector<std::vector<Node>> levels;  // positive t only, ascending

  NodeTable() {
    levels.resize(kMaxLevel + 1);
    for (int level = 0; level <= kMaxLevel; ++level) {
      const double h = std::ldexp(1.0, -level);
      const int stride = level == 0 ? 1 : 2;
      const int first = level == 0 ? 1 : 1;
      for (int j = first;; j += stride) {
        const double t = j * h;
        if (t > kMaxT) break;
        const double s = std::numbers::pi / 2.0 * std::sinh(t);
        const double e = std::exp(-2.0 * s);
        const double dist = 2.0 * e / (1.0 + e);
        const double weight = std::numbers::pi / 2.0 * std::cosh(t) * 4.0 * e / ((1.0 + e) * (1.0 + e));
        if (dist == 0.0) break;
        levels[level].push_back({t, dist, weight});
      }
    }
  }
};

const NodeTable& node_table() {
  static const NodeTable table;
  return table;
}

struct PieceOutcome {
  QuadratureResult result;
  bool converged = false;
};

PieceOutcome tanh_sinh_piece(const AnchoredIntegrand& f, double a, double b, double tol) {
  const NodeTable& table = node_table();
  const double half = 0.5 * (b - a);
  std::size_t evals = 0;

  auto left = [&](const Node& n) {
    ++evals;
    return f(a, half * n.dist);
  };
  auto right = [&](const Node& n) {
    ++evals;
    return f(b, -half * n.dist);
  };

  // Level 0 also fixes how far out each side has to be sampled.
  ++evals;
  const double center = table.center_weight * f(a, half);
  CompensatedSum sum;
  sum += center;
  double magnitude = std::abs(center);
  double cut_left = kMaxT + 1.0;
  double cut_right = kMaxT + 1.0;
  for (const Node& n : table.levels[0]) {
    if (n.t < cut_left) {
      const double v = n.weight * left(n);
      sum += v;
      magnitude += std::abs(v);
      if (n.t >= kPruneStartT && std::abs(v) <= kPruneRelative * magnitude) cut_left = n.t;
    }
    if (n.t < cut_right) {
      const double v = n.weight * right(n);
      sum += v;
      magnitude += std::abs(v);
      if (n.t >= kPruneStartT && std::abs(v) <= kPruneRelative * magnitude) cut_right = n.t;
    }
  }
  double step = 1.0;
  double estimate = half * sum.value();
  double l1 = half * magnitude;
  double error = std::abs(estimate);

  for (int level = 1; level <= kMaxLevel; ++level) {
    step *= 0.5;
    CompensatedSum fresh;
    double fresh_magnitude = 0.0;
    for (const Node& n : table.levels[level]) {
      if (n.t < cut_left) {
        const double v = n.weight * left(n);
        fresh += v;
        fresh_magnitude += std::abs(v);
      }
      if (n.t < cut_right) {
        const double v = n.weight * right(n);
        fresh += v;
        fresh_magnitude += std::abs(v);
      }
    }
    const double next = 0.5 * estimate + step * half * fresh.value();
    l1 = 0.5 * l1 + step * half * fresh_magnitude;
    error = std::abs(next - estimate);
    estimate = next;
    if (!std::isfinite(estimate)) {
      return {{estimate, std::numeric_limits<double>::infinity(), evals}, false};
    }
    if (level >= kMinLevel && error <= std::max(tol, 64.0 * std::numeric_limits<double>::epsilon() * l1)) {
      return {{estimate, error, evals}, true};
    }
  }
  return {{estimate, error, evals}, false};
}

}  // namespace

QuadratureResult integrate_1d_anchored(const AnchoredIntegrand& f, double a, double b, double tol,
                                       std::span<const double> singularities) {
  if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("integrate_1d: need finite a <= b");
  }
  if (!(tol > 0.0)) {
    throw DomainError("integrate_1d: tolerance must be positive");
  }
  std::vector<double> cuts{a};
  for (double s : singularities) {
    if (s > a && s < b) cuts.push_back(s);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  QuadratureResult total;
  total.evaluations = 0;
  CompensatedSum value;
  const double length = b - a;
  bool ok = true;
  const double pieces = static_cast<double>(cuts.size() - 1);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    if (hi <= lo) continue;
    // Budget proportional to length, plus an equal floor so one-ulp slivers
    // around a jump can still converge; the shares add up to tol.
    const double share = length > 0.0 ? tol * (0.999 * (hi - lo) / length + 0.001 / pieces) : tol;
    const PieceOutcome piece = tanh_sinh_piece(f, lo, hi, share);
    value += piece.result.value;
    total.error_estimate += piece.result.error_estimate;
    total.evaluations += piece.result.evaluations;
    ok = ok && piece.converged;
  }
  total.value = value.value();
  total.evaluations = std::max<std::size_t>(total.evaluations, 1);
  if (!ok) {
    std::ostringstream msg;
    msg << "integrate_1d: tolerance " << tol << " not reached on [" << a << ", " << b
        << "], error estimate " << total.error_estimate;
    throw ConvergenceError(msg.str(), total.value, total.error_estimate);
  }
  return total;
}

QuadratureResult integrate_1d(const Integrand& f, double a, double b, double tol,
                              std::span<const double> singularities) {
  return integrate_1d_anchored([&f](double anchor, double offset) { return f(anchor + offset); }, a, b, tol,
                               singularities);
}

// ---------------------------------------------------------------------------
// Box-sum density

BoxSumDensity::BoxSumDensity(std::vector<double> edge_lengths) : edges_(std::move(edge_lengths)) {
  if (edges_.empty()) {
    throw DomainError("box_sum_density: need at least one edge");
  }
  if (edges_.size() > kMaxEdges) {
    throw DomainError("box_sum_density: at most 12 edges are supported");
  }
  for (double u : edges_) {
    if (u == 0.0) throw DegenerateInputError("box_sum_density: zero-length edge");
    if (!(u > 0.0 && u <= 1.0)) throw DomainError("box_sum_density: edge lengths must lie in (0, 1]");
  }
  const std::size_t m = edges_.size();
  const std::size_t corners = std::size_t{1} << m;
  corner_sums_.resize(corners);
  corner_signs_.resize(corners);
  for (std::size_t mask = 0; mask < corners; ++mask) {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (mask & (std::size_t{1} << k)) s += edges_[k];
    }
    corner_sums_[mask] = s;
    corner_signs_[mask] = (std::popcount(mask) % 2 == 0) ? 1 : -1;
  }
  total_ = corner_sums_.back();
  for (double u : edges_) volume_ *= u;
  for (std::size_t k = 2; k < m; ++k) inv_factorial_ /= static_cast<double>(k);
  breakpoints_ = corner_sums_;
  std::sort(breakpoints_.begin(), breakpoints_.end());
  breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
}

double BoxSumDensity::volume_weight(double s) const {
  if (!(s >= 0.0 && s <= total_)) return 0.0;
  const std::size_t m = edges_.size();
  if (m == 1) return 1.0;
  // The density is symmetric about total/2; the nearer end has fewer, smaller terms.
  const double x = std::min(s, total_ - s);
  CompensatedSum acc;
  for (std::size_t mask = 0; mask < corner_sums_.size(); ++mask) {
    const double d = x - corner_sums_[mask];
    if (d <= 0.0) continue;
    double p = d;
    for (std::size_t k = 2; k < m; ++k) p *= d;
    acc += corner_signs_[mask] * p;
  }
  return std::max(0.0, acc.value() * inv_factorial_);
}

double BoxSumDensity::operator()(double s) const {
  return volume_weight(s) / volume_;
}

// ---------------------------------------------------------------------------
// Monte Carlo

namespace {

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  void merge(const Moments& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double n = static_cast<double>(count + other.count);
    const double delta = other.mean - mean;
    const double merged_mean = (static_cast<double>(count) * mean + static_cast<double>(other.count) * other.mean) / n;
    m2 += other.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(other.count) / n;
    mean = merged_mean;
    count += other.count;
  }
};

constexpr std::size_t kMcBlock = 4096;

}  // namespace

QuadratureResult mc_integrate(const std::function<double(std::span<const double>)>& f,
                              std::span<const double> lower, std::span<const double> upper,
                              const MonteCarloOptions& options) {
  if (lower.size() != upper.size() || lower.empty()) {
    throw DomainError("mc_integrate: box bounds must have equal, positive length");
  }
  if (options.samples < 2) {
    throw DomainError("mc_integrate: need at least 2 samples");
  }
  double volume = 1.0;
  for (std::size_t k = 0; k < lower.size(); ++k) {
    if (!(lower[k] <= upper[k]) || !std::isfinite(lower[k]) || !std::isfinite(upper[k])) {
      throw DomainError("mc_integrate: invalid box");
    }
    volume *= upper[k] - lower[k];
  }

  const std::size_t n = options.samples;
  const std::size_t blocks = (n + kMcBlock - 1) / kMcBlock;
  std::vector<Moments> partial(blocks);
  const std::size_t dim = lower.size();

  auto run_blocks = [&](std::size_t first, std::size_t stride) {
    std::vector<double> point(dim);
    for (std::size_t blk = first; blk < blocks; blk += stride) {
      Moments m;
      const std::size_t end = std::min(n, (blk + 1) * kMcBlock);
      for (std::size_t i = blk * kMcBlock; i < end; ++i) {
        CounterRng rng(options.seed, i);
        for (std::size_t k = 0; k < dim; ++k) {
          point[k] = lower[k] + (upper[k] - lower[k]) * rng.uniform();
        }
        m.push(f(point));
      }
      partial[blk] = m;
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(blocks)));
  if (threads == 1) {
    run_blocks(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(run_blocks, t, threads);
  }

  Moments all;
  for (const Moments& m : partial) all.merge(m);
  const double variance = all.count > 1 ? all.m2 / static_cast<double>(all.count - 1) : 0.0;
  QuadratureResult out;
  out.value = volume * all.mean;
  out.error_estimate = volume * std::sqrt(variance / static_cast<double>(all.count));
  out.evaluations = n;
  return out;
}

}  // namespace modcop
