#include "modcop/copula.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "modcop/errors.hpp"

namespace modcop {

namespace {

// Tolerance for reporting a derivative outside its guaranteed range.
constexpr double kRangeSlack = 1e-8;

void validate_point(const CopulaModel& m, std::span<const double> u) {
  if (u.size() != static_cast<std::size_t>(m.dimension())) {
    throw DomainError("point has " + std::to_string(u.size()) + " coordinates, model dimension is " +
                      std::to_string(m.dimension()));
  }
  for (double x : u) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("point coordinates must lie in [0, 1]");
  }
}

void validate_index(const CopulaModel& m, int j) {
  if (j < 0 || j >= m.dimension()) throw DomainError("coordinate index out of range");
}

void require_interior(std::span<const double> u, int j) {
  const double x = u[static_cast<std::size_t>(j)];
  if (!(x > 0.0 && x < 1.0)) {
    throw BoundaryError("derivative with respect to u" + std::to_string(j + 1) + " needs 0 < u" +
                        std::to_string(j + 1) + " < 1");
  }
}

std::vector<double> without(std::span<const double> u, int a, int b = -1) {
  std::vector<double> out;
  out.reserve(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (static_cast<int>(k) != a && static_cast<int>(k) != b) out.push_back(u[k]);
  }
  return out;
}

void check_range(double value, double lo, double hi, const char* what) {
  if (value < lo - kRangeSlack || value > hi + kRangeSlack || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << what << " = " << value << " lies outside [" << lo << ", " << hi << "]";
    throw NumericalError(msg.str());
  }
}

double unsigned_cdf_exact(const Generator& g, std::span<const double> w, double tol, double& error) {
  for (double x : w) {
    if (x == 0.0) return 0.0;
  }
  if (w.size() > BoxSumDensity::kMaxEdges) {
    throw UnsupportedDimensionError("exact cdf supports at most 12 dimensions");
  }
  const QuadratureResult r = reduced_integral(g, 0.0, w, tol);
  error += r.error_estimate;
  return r.value;
}

double unsigned_partial(const Generator& g, std::span<const double> w, int j, double tol) {
  const auto edges = without(w, j);
  const double value = reduced_integral(g, w[static_cast<std::size_t>(j)], edges, tol).value;
  check_range(value, 0.0, 1.0, "first partial derivative");
  return value;
}

double unsigned_second(const Generator& g, std::span<const double> w, int i, int j, double tol) {
  const auto ui = w[static_cast<std::size_t>(i)];
  if (i != j) {
    const auto edges = without(w, i, j);
    const double value = reduced_integral(g, ui + w[static_cast<std::size_t>(j)], edges, tol).value;
    check_range(value, 0.0, 1.0, "mixed second partial derivative");
    return value;
  }
  const int partner = (i == 0) ? 1 : 0;
  const auto edges = without(w, i, partner);
  const double upper = reduced_integral(g, ui + w[static_cast<std::size_t>(partner)], edges, tol).value;
  const double lower = reduced_integral(g, ui, edges, tol).value;
  const double value = upper - lower;
  check_range(value, -1.0, 1.0, "pure second partial derivative");
  return value;
}

// Visits the reflected unsigned points of a signed model:
// C_signed(v) = sum over subsets S of the sign-1 slots of (-1)^|S| C(w^S),
// where w_j = 1 - v_j on S, 1 on the rest of the sign-1 slots, v_j elsewhere.
// `required` lists slots that must belong to S (differentiated sign-1 slots).
template <class Visit>
void for_each_reflection(const CopulaModel& m, std::span<const double> v, std::span<const int> required,
                         Visit&& visit) {
  std::vector<int> flipped;
  for (int k = 0; k < m.dimension(); ++k) {
    if (m.signs()[static_cast<std::size_t>(k)] == 1) flipped.push_back(k);
  }
  const std::size_t subsets = std::size_t{1} << flipped.size();
  std::vector<double> w(v.begin(), v.end());
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    bool ok = true;
    for (int r : required) {
      const auto pos = std::find(flipped.begin(), flipped.end(), r) - flipped.begin();
      if (!(mask & (std::size_t{1} << pos))) ok = false;
    }
    if (!ok) continue;
    int parity = 0;
    for (std::size_t b = 0; b < flipped.size(); ++b) {
      const auto k = static_cast<std::size_t>(flipped[b]);
      if (mask & (std::size_t{1} << b)) {
        w[k] = 1.0 - v[k];
        ++parity;
      } else {
        w[k] = 1.0;
      }
    }
    visit(std::span<const double>(w), parity % 2 == 0 ? 1.0 : -1.0);
  }
}

}  // namespace

CopulaModel::CopulaModel(int dimension, Generator generator, std::vector<int> signs)
    : dimension_(dimension), generator_(std::move(generator)), signs_(std::move(signs)) {
  if (dimension_ < 2) throw DomainError("copula dimension must be at least 2");
  if (signs_.empty()) signs_.assign(static_cast<std::size_t>(dimension_), 0);
  if (signs_.size() != static_cast<std::size_t>(dimension_)) {
    throw DomainError("sign vector length must equal the dimension");
  }
  for (int s : signs_) {
    if (s != 0 && s != 1) throw DomainError("signs must be 0 or 1");
    signed_ = signed_ || s == 1;
  }
}

std::string CopulaModel::id() const {
  std::ostringstream out;
  out << generator_.id() << ";d=" << dimension_;
  if (signed_) {
    out << ";signs=";
    for (int s : signs_) out << s;
  }
  return out.str();
}

double density_from_sum(const CopulaModel& m, SplitReal signed_sum) {
  const SplitReal r = mod1(signed_sum);
  return m.generator().density_at(r.anchor, r.offset);
}

double density(const CopulaModel& m, std::span<const double> u) {
  validate_point(m, u);
  double terms[64];
  std::vector<double> heap;
  double* t = terms;
  if (u.size() > 64) {
    heap.resize(u.size());
    t = heap.data();
  }
  for (std::size_t k = 0; k < u.size(); ++k) t[k] = m.signs()[k] ? -u[k] : u[k];
  return density_from_sum(m, compensated_total({t, u.size()}));
}

QuadratureResult reduced_integral(const Generator& g, double shift, std::span<const double> edges, double tolerance) {
  for (double e : edges) {
    if (e == 0.0) return {0.0, 0.0, 1};
  }
  if (edges.empty()) {
    const SplitReal r = mod1(SplitReal{shift, 0.0});
    return {g.density_at(r.anchor, r.offset), 0.0, 1};
  }
  const BoxSumDensity box(std::vector<double>(edges.begin(), edges.end()));
  const double total = box.support_end();
  const double lo = shift;
  const double hi = shift + total;
  const auto first_cell = static_cast<long>(std::floor(lo));
  const auto last_cell = static_cast<long>(std::ceil(hi));

  const double cells = static_cast<double>(last_cell - first_cell);
  CompensatedSum value;
  QuadratureResult out;
  out.evaluations = 0;
  std::vector<double> cuts;
  for (long k = first_cell; k < last_cell; ++k) {
    const double cell = static_cast<double>(k);
    const double y0 = std::max(0.0, lo - cell);
    const double y1 = std::min(1.0, hi - cell);
    if (!(y1 > y0)) continue;
    cuts.assign(g.breakpoints().begin(), g.breakpoints().end());
    for (double b : box.breakpoints()) cuts.push_back((shift + b) - cell);
    const double base = cell - shift;
    auto integrand = [&](double anchor, double offset) {
      const double f = g.density_at(anchor, offset);
      if (f == 0.0) return 0.0;
      return f * box.volume_weight((base + anchor) + offset);
    };
    const QuadratureResult piece =
        integrate_1d_anchored(integrand, y0, y1, tolerance * (0.99 * (y1 - y0) / total + 0.01 / cells), cuts);
    value += piece.value;
    out.error_estimate += piece.error_estimate;
    out.evaluations += piece.evaluations;
  }
  out.value = value.value();
  out.evaluations = std::max<std::size_t>(out.evaluations, 1);
  return out;
}

CdfResult cdf(const CopulaModel& m, std::span<const double> u, const CdfOptions& options) {
  validate_point(m, u);
  for (double x : u) {
    if (x == 0.0) return {0.0, 0.0, CdfMethod::exact};
  }
  CdfMethod method = options.method;
  if (method == CdfMethod::automatic) {
    method = m.dimension() <= kExactCdfMaxDimension ? CdfMethod::exact : CdfMethod::monte_carlo;
  }
  if (method == CdfMethod::monte_carlo) {
    const std::vector<double> lower(u.size(), 0.0);
    MonteCarloOptions mc;
    mc.samples = options.mc_samples;
    mc.seed = options.seed;
    mc.threads = options.threads;
    const QuadratureResult r = mc_integrate([&m](std::span<const double> p) { return density(m, p); }, lower, u, mc);
    return {r.value, r.error_estimate, CdfMethod::monte_carlo};
  }
  if (m.dimension() > static_cast<int>(BoxSumDensity::kMaxEdges)) {
    throw UnsupportedDimensionError("exact cdf supports at most 12 dimensions");
  }
  double error = 0.0;
  if (!m.is_signed()) {
    const double v = unsigned_cdf_exact(m.generator(), u, options.tolerance, error);
    return {v, error, CdfMethod::exact};
  }
  CompensatedSum acc;
  for_each_reflection(m, u, {}, [&](std::span<const double> w, double sign) {
    acc += sign * unsigned_cdf_exact(m.generator(), w, options.tolerance, error);
  });
  return {acc.value(), error, CdfMethod::exact};
}

double partial_derivative(const CopulaModel& m, std::span<const double> u, int j, double tolerance) {
  validate_point(m, u);
  validate_index(m, j);
  require_interior(u, j);
  if (!m.is_signed()) return unsigned_partial(m.generator(), u, j, tolerance);

  const int req[1] = {j};
  const bool flipped = m.signs()[static_cast<std::size_t>(j)] == 1;
  CompensatedSum acc;
  for_each_reflection(m, u, flipped ? std::span<const int>(req) : std::span<const int>(),
                      [&](std::span<const double> w, double sign) {
                        // d/dv_j of w_j = 1 - v_j contributes a factor -1.
                        const double chain = flipped ? -1.0 : 1.0;
                        acc += sign * chain * unsigned_partial(m.generator(), w, j, tolerance);
                      });
  const double value = acc.value();
  check_range(value, 0.0, 1.0, "first partial derivative");
  return value;
}

double second_partial(const CopulaModel& m, std::span<const double> u, int i, int j, double tolerance) {
  if (m.dimension() < 3) {
    throw UnsupportedDimensionError("second partial derivatives are only available for d >= 3");
  }
  validate_point(m, u);
  validate_index(m, i);
  validate_index(m, j);
  require_interior(u, i);
  require_interior(u, j);
  if (!m.is_signed()) return unsigned_second(m.generator(), u, i, j, tolerance);

  std::vector<int> req;
  double chain = 1.0;
  for (int c : {i, j}) {
    if (m.signs()[static_cast<std::size_t>(c)] == 1) chain = -chain;
  }
  if (m.signs()[static_cast<std::size_t>(i)] == 1) req.push_back(i);
  if (j != i && m.signs()[static_cast<std::size_t>(j)] == 1) req.push_back(j);
  CompensatedSum acc;
  for_each_reflection(m, u, req, [&](std::span<const double> w, double sign) {
    acc += sign * chain * unsigned_second(m.generator(), w, i, j, tolerance);
  });
  const double value = acc.value();
  check_range(value, i == j ? -1.0 : 0.0, 1.0, "second partial derivative");
  return value;
}

std::vector<double> SampleMatrix::column(std::size_t c) const {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = values[r * cols + c];
  return out;
}

SampleMatrix sample_copula(const CopulaModel& m, std::size_t n, std::uint64_t seed, unsigned threads) {
  if (n == 0) throw DomainError("sample_copula: n must be at least 1");
  const auto d = static_cast<std::size_t>(m.dimension());
  SampleMatrix out;
  out.rows = n;
  out.cols = d;
  out.values.resize(n * d);
  out.seed = seed;
  out.model_id = m.id();

  auto fill = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      CounterRng rng(seed, r);
      double* row = out.values.data() + r * d;
      double sum = 0.0;
      for (std::size_t k = 0; k + 1 < d; ++k) {
        row[k] = rng.uniform();
        sum += row[k];
      }
      row[d - 1] = mod1(m.generator().draw(rng) - sum).value;
      for (std::size_t k = 0; k < d; ++k) {
        if (m.signs()[k] == 1) row[k] = 1.0 - row[k];
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::size_t>(n, 1024))));
  if (workers == 1) {
    fill(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned t = 0; t < workers; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(fill, begin, end);
    }
  }
  return out;
}

double checkerboard_density(std::span<const double> u) {
  if (u.size() != 2) throw DomainError("checkerboard copula is bivariate");
  const bool low = u[0] <= 0.5 && u[1] <= 0.5;
  const bool high = u[0] >= 0.5 && u[1] >= 0.5;
  return (low || high) ? 2.0 : 0.0;
}

}  // namespace modcop
