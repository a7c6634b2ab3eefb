#include "modcop/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "modcop/copula.hpp"
#include "modcop/errors.hpp"
#include "modcop/generator_parse.hpp"
#include "modcop/numerics.hpp"
#include "modcop/pathology.hpp"
#include "modcop/random.hpp"
#include "modcop/stats.hpp"

namespace modcop {

namespace {

const std::vector<std::string> kGeneratorChecks = {"normalization", "nonnegativity", "cdf-consistency", "inverse",
                                                   "sampler-ks",    "rho",           "kendall"};
const std::vector<std::string> kCopulaChecks = {
    "total-mass", "margins-ks",     "marginal",      "grounded",  "d-increasing", "frechet",
    "lipschitz",  "exchangeable",   "hyperplane",    "partial-bounds", "partial-fd", "second-bounds",
    "subvector",  "tail",           "mc-agreement",  "empirical", "chi-square"};
const std::vector<std::string> kGlobalChecks = {"unbounded"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// (1 + w) g - w f_{1/2}: a mixture with one negated weight. Its density goes
// to minus infinity at 1/2.
class NegatedMixtureImpl final : public GeneratorImpl {
 public:
  NegatedMixtureImpl(Generator base, double w) : base_(std::move(base)), pair_(singular_pair(0.5)), w_(w) {}
  std::string id() const override { return base_.id() + "!negated"; }
  double density(double x) const override { return density_at(x, 0.0); }
  double density_at(double a, double o) const override {
    return (1.0 + w_) * base_.density_at(a, o) - w_ * pair_.density_at(a, o);
  }
  double cdf(double x) const override { return (1.0 + w_) * base_.cdf(x) - w_ * pair_.cdf(x); }
  double inverse_cdf(double p) const override {
    return invert_monotone_cdf(
        p, [this](double x) { return std::clamp(cdf(x), 0.0, 1.0); }, [](double) { return 0.0; });
  }
  std::vector<double> singular_points() const override {
    auto s = base_.singular_points();
    s.push_back(0.5);
    return s;
  }
  std::vector<double> breakpoints() const override {
    auto s = base_.breakpoints();
    s.push_back(0.5);
    return s;
  }

 private:
  Generator base_;
  Generator pair_;
  double w_;
};

class ScaledImpl final : public GeneratorImpl {
 public:
  ScaledImpl(Generator base, double factor) : base_(std::move(base)), factor_(factor) {}
  std::string id() const override { return base_.id(); }
  double density(double x) const override { return factor_ * base_.density(x); }
  double density_at(double a, double o) const override { return factor_ * base_.density_at(a, o); }
  double cdf(double x) const override { return base_.cdf(x); }
  double inverse_cdf(double p) const override { return base_.inverse_cdf(p); }
  std::vector<double> singular_points() const override { return base_.singular_points(); }
  std::vector<double> breakpoints() const override { return base_.breakpoints(); }
  double draw(CounterRng& rng) const override { return base_.draw(rng); }

 private:
  Generator base_;
  double factor_;
};

struct Result {
  bool passed;
  std::string detail;
};

class Context {
 public:
  Context(const VerifyOptions& o, std::string spec, Generator g, int d, std::vector<int> signs, std::size_t gen_index)
      : opts(o),
        spec(std::move(spec)),
        g(std::move(g)),
        d(d),
        model(d > 0 ? d : 2, this->g, d > 0 ? std::move(signs) : std::vector<int>{}),
        gen_index(gen_index) {}

  bool injected(const std::string& name) const { return opts.inject == name; }

  CounterRng rng(std::size_t check_index) const {
    return CounterRng(opts.seed, (std::uint64_t{check_index} << 40) | (std::uint64_t{gen_index} << 20) |
                                     static_cast<std::uint64_t>(d));
  }

  double exact_cdf(std::span<const double> u) const {
    CdfOptions c;
    c.method = CdfMethod::exact;
    c.tolerance = opts.tolerance;
    return cdf(model, u, c).value;
  }

  std::vector<double> random_point(CounterRng& r, double lo = 0.0, double hi = 1.0) const {
    std::vector<double> u(static_cast<std::size_t>(d));
    for (double& x : u) x = lo + (hi - lo) * r.uniform();
    return u;
  }

  const VerifyOptions& opts;
  std::string spec;
  Generator g;
  int d;
  CopulaModel model;
  std::size_t gen_index;
};

bool smooth(const Generator& g) { return g.breakpoints().empty() && g.singular_points().empty(); }

// ---- generator checks ----

Result check_normalization(const Context& c, std::size_t) {
  Generator g = c.g;
  if (c.injected("normalization")) g = Generator(std::make_shared<ScaledImpl>(g, 1.01));
  const double total =
      integrate_1d_anchored([&](double a, double o) { return g.density_at(a, o); }, 0.0, 1.0, 1e-12, g.breakpoints())
          .value;
  return {std::abs(total - 1.0) <= 1e-8, "integral=" + fmt(total)};
}

Result check_nonnegativity(const Context& c, std::size_t) {
  auto f = [&](double a, double o) {
    double v = c.g.density_at(a, o);
    if (c.injected("nonnegativity") && a + o > 0.9) v = -v;
    return v;
  };
  double lowest = std::numeric_limits<double>::infinity();
  bool nan = false;
  auto visit = [&](double a, double o) {
    const double v = f(a, o);
    if (std::isnan(v)) nan = true;
    lowest = std::min(lowest, v);
  };
  constexpr int kGrid = 10000;
  for (int k = 0; k < kGrid; ++k) visit((k + 0.5) / kGrid, 0.0);
  for (double s : c.g.breakpoints()) {
    for (double e : {1e-3, 1e-6, 1e-9, 1e-12}) {
      visit(s, e);
      visit(s, -e);
    }
  }
  return {!nan && lowest >= 0.0, nan ? "nan density" : "min=" + fmt(lowest)};
}

Result check_cdf_consistency(const Context& c, std::size_t idx) {
  auto r = c.rng(idx);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double x = r.uniform();
    std::vector<double> cuts;
    for (double b : c.g.breakpoints()) {
      if (b < x) cuts.push_back(b);
    }
    const double integral =
        integrate_1d_anchored([&](double a, double o) { return c.g.density_at(a, o); }, 0.0, x, 1e-12, cuts).value;
    double F = c.g.cdf(x);
    if (c.injected("cdf-consistency")) F *= 1.0 + 1e-5;
    worst = std::max(worst, std::abs(F - integral));
  }
  return {worst <= 1e-7, "max|F-int f|=" + fmt(worst)};
}

Result check_inverse(const Context& c, std::size_t) {
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double p = (k + 0.5) / 1000.0;
    double x = c.g.inverse_cdf(p);
    if (c.injected("inverse")) x = std::min(1.0, x + 1e-6);
    worst = std::max(worst, std::abs(c.g.cdf(x) - p));
  }
  return {worst <= 1e-9, "max|F(Finv(p))-p|=" + fmt(worst)};
}

Result check_sampler_ks(const Context& c, std::size_t) {
  auto draws = sample(c.g, c.opts.samples, c.opts.seed + c.gen_index);
  for (double& x : draws) {
    if (c.injected("sampler-ks")) x = std::pow(x, 1.1);
    x = c.g.cdf(x);
  }
  const KsResult ks = ks_uniformity(draws);
  return {ks.p_value > 0.001, "D=" + fmt(ks.statistic) + " p=" + fmt(ks.p_value)};
}

Result check_rho(const Context& c, std::size_t) {
  const double closed = spearman_rho_closed_form(c.g, c.opts.tolerance);
  const double m1 = generator_moment(c.g, 1, c.opts.tolerance);
  const double m2 = generator_moment(c.g, 2, c.opts.tolerance);
  const double via_moments = c.injected("rho") ? 6.0 * (m1 - m1 * m1) - 1.0 : 6.0 * (m1 - m2) - 1.0;
  const CopulaModel m2d(2, c.g);
  const SampleMatrix s = sample_copula(m2d, c.opts.samples, c.opts.seed + 101 + c.gen_index);
  const RhoResult sample_rho = spearman_rho_sample(s, 0, 1);
  const double gate = 4.0 / std::sqrt(static_cast<double>(c.opts.samples));
  const bool ok = std::abs(closed - via_moments) <= 1e-9 && closed > -1.0 && closed < 0.5 &&
                  std::abs(sample_rho.value - via_moments) <= gate;
  return {ok, "closed=" + fmt(closed) + " moments=" + fmt(via_moments) + " sample=" + fmt(sample_rho.value)};
}

Result check_kendall(const Context& c, std::size_t) {
  const CopulaModel m2d(2, c.g);
  const SampleMatrix s = sample_copula(m2d, c.opts.samples, c.opts.seed + 202 + c.gen_index);
  const auto x = s.column(0);
  const double tau = c.injected("kendall") ? kendall_tau(x, x) : kendall_tau_sample(s, 0, 1);
  return {tau <= 2.0 / 3.0 + 0.02, "tau=" + fmt(tau)};
}

// ---- copula checks ----

Result check_total_mass(const Context& c, std::size_t) {
  const std::vector<double> one(static_cast<std::size_t>(c.d), 1.0);
  double v = c.exact_cdf(one);
  if (c.injected("total-mass")) v *= 1.001;
  return {std::abs(v - 1.0) <= 1e-4, "C(1)=" + fmt(v)};
}

SampleMatrix copula_sample(const Context& c, std::size_t idx) {
  return sample_copula(c.model, c.opts.samples, c.opts.seed + 1000 * idx + c.gen_index);
}

Result check_margins_ks(const Context& c, std::size_t idx) {
  const SampleMatrix s = copula_sample(c, idx);
  double worst_p = 1.0;
  for (std::size_t j = 0; j < s.cols; ++j) {
    auto col = s.column(j);
    if (c.injected("margins-ks") && j == 0) {
      for (double& x : col) x = std::pow(x, 1.05);
    }
    worst_p = std::min(worst_p, ks_uniformity(col).p_value);
  }
  return {worst_p > 0.001, "min p=" + fmt(worst_p)};
}

Result check_marginal(const Context& c, std::size_t idx) {
  auto r = c.rng(idx);
  double worst = 0.0;
  for (int j = 0; j < c.d; ++j) {
    for (int k = 0; k < 20; ++k) {
      std::vector<double> u(static_cast<std::size_t>(c.d), 1.0);
      const double t = r.uniform();
      u[static_cast<std::size_t>(j)] = t;
      double v = c.exact_cdf(u);
      if (c.injected("marginal")) v *= 1.0 + 1e-5;
      worst = std::max(worst, std::abs(v - t));
    }
  }
  return {worst <= 1e-6, "max|C-t|=" + fmt(worst)};
}

Result check_grounded(const Context& c, std::size_t idx) {
  auto r = c.rng(idx);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    auto u = c.random_point(r);
    u[r.below(static_cast<std::uint64_t>(c.d))] = 0.0;
    double v = c.exact_cdf(u);
    if (c.injected("grounded")) v += 1e-15;
    worst = std::max(worst, std::abs(v));
  }
  return {worst == 0.0, "max|C|=" + fmt(worst)};
}

double rectangle_volume(const Context& c, std::span<const double> a, std::span<const double> b, bool perturb) {
  const auto d = static_cast<std::size_t>(c.d);
  CompensatedSum sum;
  std::vector<double> v(d);
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    int lows = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const bool low = (mask >> j) & 1;
      v[j] = low ? a[j] : b[j];
      lows += low ? 1 : 0;
    }
    double value = c.exact_cdf(v);
    if (perturb) {
      double wave = 0.05;
      for (double x : v) wave *= std::sin(2.0 * std::numbers::pi * x);
      value += wave;
    }
    sum += (lows % 2 == 0) ? value : -value;
  }
  return sum.value();
}

Result check_d_increasing(const Context& c, std::size_t idx) {
  auto r = c.rng(idx);
  double lowest = std::numeric_limits<double>::infinity();
  const auto d = static_cast<std::size_t>(c.d);
  std::vector<double> a(d), b(d);
  for (int k = 0; k < 100; ++k) {
    for (std::size_t j = 0; j < d; ++j) {
      const double x = r.uniform(), y = r.uniform();
      a[j] = std::min(x, y);
      b[j] = std::max(x, y);
    }
    lowest = std::min(lowest, rectangle_volume(c, a, b, c.injected("d-increasing")));
  }
  return {lowest >= -1e-7, "min volume=" + fmt(lowest)};
}

// Calls visit(u) for every point of the grid {0, 1/(m-1), ..., 1}^d.
template <class Visit>
void for_each_grid_point(int d, int m, Visit&& visit) {
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  std::vector<double> u(static_cast<std::size_t>(d));
  while (true) {
    for (std::size_t j = 0; j < idx.size(); ++j) u[j] = idx[j] / static_cast<double>(m - 1);
    visit(std::span<const double>(u));
    std::size_t j = 0;
    while (j < idx.size() && ++idx[j] == m) idx[j++] = 0;
    if (j == idx.size()) break;
  }
}

Result check_frechet(const Context& c, std::size_t) {
  double worst = 0.0;
  for_each_grid_point(c.d, 11, [&](std::span<const double> u) {
    double v = c.exact_cdf(u);
    if (c.injected("frechet")) v *= 1.01;
    const double upper = *std::min_element(u.begin(), u.end());
    const double lower = std::max(std::accumulate(u.begin(), u.end(), 0.0) - (c.d - 1), 0.0);
    worst = std::max({worst, v - upper, lower - v});
  });
  return {worst <= 1e-9, "max violation=" + fmt(worst)};
}

// Copulas are 1-Lipschitz in the l1 norm; the sup-norm constant is d.
Result check_lipschitz(const Context& c, std::size_t idx) {
  auto r = c.rng(idx);
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 100; ++k) {
    const auto u = c.random_point(r);
    auto v = u;
    const double scale = (k % 2 == 0) ? 0.01 : 0.5;
    double l1 = 0.0;
    for (double& x : v) {
      x = std::clamp(x + scale * (2.0 * r.uniform() - 1.0), 0.0, 1.0);
    }
    for (std::size_t j = 0; j < u.size(); ++j) l1 += std::abs(u[j] - v[j]);
    double cu = c.exact_cdf(u), cv = c.exact_cdf(v);
    if (c.injected("lipschitz")) {
      cu += 0.02 * std::sin(500.0 * u[0]);
      cv += 0.02 * std::sin(500.0 * v[0]);
    }
    worst = std::max(worst, std::abs(cu - cv) - l1);
  }
  return {worst <= 1e-9, "max(|dC|-|du|_1)=" + fmt(worst)};
}

Result check_exchangeable(const Context& c, std::size_t idx) {
  if (c.model.is_signed()) return {true, "not applicable to signed models"};
  auto r = c.rng(idx);
  double worst = 0.0;
  const bool bug = c.injected("exchangeable");
  for (int k = 0; k < 30; ++k) {
    const auto u = c.random_point(r);
    auto v = u;
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[r.below(i)]);
    std::rotate(v.begin(), v.begin() + 1, v.end());
    double cu = c.exact_cdf(u), cv = c.exact_cdf(v);
    double du = density(c.model, u), dv = density(c.model, v);
    if (bug) {
      cu += 1e-6 * u[0];
      cv += 1e-6 * v[0];
      du *= 1.0 + 0.1 * u[0];
      dv *= 1.0 + 0.1 * v[0];
    }
    worst = std::max(worst, std::abs(cu - cv) / std::max(1.0, std::abs(cu)));
    if (std::isfinite(du) || std::isfinite(dv)) worst = std::max(worst, std::abs(du - dv) / std::max(1.0, std::abs(du)));
  }
  return {worst <= 1e-10, "max rel diff=" + fmt(worst)};
}

// Dyadic coordinates make both sums exact, so the densities must agree bit for bit.
Result check_hyperplane(const Context& c, std::size_t idx) {
  auto r = c.rng(idx);
  constexpr double kGrain = 1.0 / 1048576.0;
  int mismatches = 0;
  const bool bug = c.injected("hyperplane");
  // Moving mass between slots of opposite sign would change the signed sum.
  if (c.model.signs()[0] != c.model.signs()[1]) return {true, "not applicable (first two signs differ)"};
  for (int k = 0; k < 50; ++k) {
    std::vector<double> u(static_cast<std::size_t>(c.d));
    for (double& x : u) x = static_cast<double>(r.below(1048577)) * kGrain;
    auto v = u;
    const double room = std::min(1.0 - v[0], v[1]);
    const double shift = std::floor(r.uniform() * room / kGrain) * kGrain;
    v[0] += shift;
    v[1] -= shift;
    double du = density(c.model, u), dv = density(c.model, v);
    if (bug) {
      du *= 1.0 + 0.1 * u[0];
      dv *= 1.0 + 0.1 * v[0];
    }
    if (!(du == dv)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches"};
}

std::vector<double> interior_point(const Context& c, CounterRng& r) { return c.random_point(r, 0.02, 0.98); }

Result check_partial_bounds(const Context& c, std::size_t idx) {
  auto r = c.rng(idx);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int k = 0; k < 100; ++k) {
    const auto u = interior_point(c, r);
    for (int j = 0; j < c.d; ++j) {
      double v = partial_derivative(c.model, u, j, c.opts.tolerance);
      if (c.injected("partial-bounds")) v = -v - 1e-3;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return {lo >= -1e-6 && hi <= 1.0 + 1e-6, "range=[" + fmt(lo) + ", " + fmt(hi) + "]"};
}

Result check_partial_fd(const Context& c, std::size_t idx) {
  if (!smooth(c.g)) return {true, "not applicable (generator not smooth)"};
  auto r = c.rng(idx);
  constexpr double h = 1e-4;
  double worst = 0.0;
  for (int k = 0; k < 30; ++k) {
    const auto u = c.random_point(r, 0.05, 0.95);
    for (int j = 0; j < c.d; ++j) {
      auto up = u, down = u;
      up[static_cast<std::size_t>(j)] += h;
      down[static_cast<std::size_t>(j)] -= h;
      const double fd = (c.exact_cdf(up) - c.exact_cdf(down)) / (2.0 * h);
      double v = partial_derivative(c.model, u, j, c.opts.tolerance);
      if (c.injected("partial-fd")) v += 1e-4;
      worst = std::max(worst, std::abs(v - fd));
    }
  }
  return {worst <= 1e-5, "max|dC-fd|=" + fmt(worst)};
}

Result check_second_bounds(const Context& c, std::size_t idx) {
  if (c.d < 3) return {true, "not applicable for d=2"};
  auto r = c.rng(idx);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int k = 0; k < 50; ++k) {
    const auto u = interior_point(c, r);
    for (int i = 0; i < c.d; ++i) {
      for (int j = i; j < c.d; ++j) {
        double v = second_partial(c.model, u, i, j, c.opts.tolerance);
        if (c.injected("second-bounds")) v *= 4.0;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  return {lo >= -1.0 - 1e-6 && hi <= 1.0 + 1e-6, "range=[" + fmt(lo) + ", " + fmt(hi) + "]"};
}

Result check_subvector(const Context& c, std::size_t idx) {
  if (c.d < 3) return {true, "not applicable for d=2"};
  SampleMatrix s = copula_sample(c, idx);
  if (c.injected("subvector")) {
    for (std::size_t k = 0; k < s.rows; ++k) s.values[k * s.cols + s.cols - 1] = 1.0 - s.values[k * s.cols];
  }
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < s.cols; ++i) {
    for (std::size_t j = i + 1; j < s.cols; ++j) {
      // Any d-1 coordinates are independent, so every pair is.
      worst = std::max(worst, std::abs(spearman_rho_sample(s, i, j).value));
    }
  }
  const double gate = 4.0 / std::sqrt(static_cast<double>(s.rows));
  return {worst <= gate, "max|rho|=" + fmt(worst) + " gate=" + fmt(gate)};
}

Result check_tail(const Context& c, std::size_t) {
  if (c.model.is_signed()) return {true, "not applicable to signed models"};
  std::vector<double> ts;
  for (double t : {0.1, 0.05, 0.02, 0.01}) {
    if (t <= 1.0 / c.d) ts.push_back(t);
  }
  auto points = tail_diagnostic(c.model, ts);
  bool ok = true;
  double margin = std::numeric_limits<double>::infinity();
  for (auto& p : points) {
    if (c.injected("tail")) p.ratio += 1.0;
    margin = std::min(margin, p.bound + 1e-8 - p.ratio);
    ok = ok && p.ratio <= p.bound + 1e-8;
  }
  std::string detail = "min(bound-ratio)=" + fmt(margin);
  if (c.g.id() == "beta:1.5,1.5") {
    for (std::size_t k = 1; k < points.size(); ++k) ok = ok && points[k].ratio < points[k - 1].ratio;
    detail += " ratio(0.01)=" + fmt(points.back().ratio);
  }
  return {ok, detail};
}

Result check_mc_agreement(const Context& c, std::size_t idx) {
  auto r = c.rng(idx);
  int over3 = 0;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto u = c.random_point(r, 0.05, 1.0);
    const double exact = c.exact_cdf(u);
    CdfOptions o;
    o.method = CdfMethod::monte_carlo;
    o.mc_samples = c.opts.mc_samples;
    o.seed = c.opts.seed + static_cast<std::uint64_t>(k);
    CdfResult mc = cdf(c.model, u, o);
    if (c.injected("mc-agreement")) mc.value += 0.01;
    const double z = std::abs(mc.value - exact) / std::max(mc.error_estimate, 1e-15);
    worst = std::max(worst, z);
    if (z > 3.0) ++over3;
  }
  // 50 draws at 3 sigma: allow one exceedance, never a gross one.
  return {over3 <= 1 && worst <= 5.0, "max z=" + fmt(worst) + " over 3 sigma: " + std::to_string(over3)};
}

Result check_empirical(const Context& c, std::size_t idx) {
  const SampleMatrix s = copula_sample(c, idx);
  const EmpiricalCopula emp(s);
  const int m = c.d == 2 ? 21 : (c.d == 3 ? 11 : 6);
  double worst = 0.0;
  bool structural = true;
  const bool bug = c.injected("empirical");
  for_each_grid_point(c.d, m, [&](std::span<const double> u) {
    std::vector<double> q(u.begin(), u.end());
    if (bug) {
      for (double& x : q) x = 1.0 - x;
    }
    const double e = emp(q);
    const double exact = c.exact_cdf(u);
    worst = std::max(worst, std::abs(e - exact));
    if (std::find(u.begin(), u.end(), 0.0) != u.end() && e != 0.0) structural = false;
  });
  const std::vector<double> one(static_cast<std::size_t>(c.d), 1.0);
  if (emp(one) != 1.0) structural = false;
  const double gate = 2.5 / std::sqrt(static_cast<double>(s.rows));
  return {structural && worst <= gate, "sup|Cn-C|=" + fmt(worst) + " gate=" + fmt(gate)};
}

Result check_chi_square(const Context& c, std::size_t idx) {
  if (c.d != 2) return {true, "not applicable for d>2"};
  constexpr int kBins = 20;
  std::vector<double> grid_cdf((kBins + 1) * (kBins + 1));
  for (int a = 0; a <= kBins; ++a) {
    for (int b = 0; b <= kBins; ++b) {
      const double u[2] = {a / double(kBins), b / double(kBins)};
      grid_cdf[a * (kBins + 1) + b] = c.exact_cdf(u);
    }
  }
  const double n = static_cast<double>(c.opts.chi_square_draws);
  std::vector<double> expected(kBins * kBins), observed(kBins * kBins, 0.0);
  for (int a = 0; a < kBins; ++a) {
    for (int b = 0; b < kBins; ++b) {
      const auto at = [&](int i, int j) { return grid_cdf[i * (kBins + 1) + j]; };
      const double p = at(a + 1, b + 1) - at(a, b + 1) - at(a + 1, b) + at(a, b);
      expected[a * kBins + b] = n * std::max(p, 0.0);
    }
  }
  const SampleMatrix s = sample_copula(c.model, c.opts.chi_square_draws, c.opts.seed + 1000 * idx + c.gen_index);
  for (std::size_t k = 0; k < s.rows; ++k) {
    double x = s(k, 0);
    if (c.injected("chi-square")) x = std::pow(x, 1.05);
    const int a = std::min(kBins - 1, static_cast<int>(x * kBins));
    const int b = std::min(kBins - 1, static_cast<int>(s(k, 1) * kBins));
    observed[a * kBins + b] += 1.0;
  }
  const ChiSquareResult chi = chi_square_gof(observed, expected);
  return {chi.p_value > 0.001, "chi2=" + fmt(chi.statistic) + " dof=" + fmt(chi.dof) + " p=" + fmt(chi.p_value)};
}

Result check_unbounded(const VerifyOptions& o) {
  constexpr double kThreshold = 1e9;
  const UnboundednessWitness w = unboundedness_probe(0.45, 0.55, kThreshold);
  const PartialSum sum(w.terms, EnumerationMode::evenly_spaced, WeightScheme::geometric(1.1, 42));
  double value = w.value;
  const CopulaModel m(2, sum.generator());
  const auto u = witness_copula_point(w, 2);
  double cu = density(m, u);
  if (o.inject == "unbounded") {
    value = std::min(value, 1e6);
    cu = std::min(cu, 1e6);
  }
  const double landed = mod1(compensated_total(u)).anchor;
  std::vector<double> anchors;
  for (const auto& comp : sum.components()) anchors.push_back(comp.anchor);
  const Generator excised = indicator_excision(sum.generator(), anchors);
  CounterRng r(o.seed, 77);
  bool finite = true;
  for (int k = 0; k < 100000; ++k) finite = finite && std::isfinite(excised.density(r.uniform()));
  for (double a : anchors) finite = finite && std::isfinite(excised.density(a));
  const bool ok = std::isfinite(value) && value > kThreshold && std::isfinite(cu) && cu > kThreshold &&
                  std::abs(landed - w.x) <= 1e-12 && finite;
  return {ok, "n=" + std::to_string(w.terms) + " h=" + fmt(value) + " c(u)=" + fmt(cu) +
                  (finite ? " excised finite" : " excised not finite")};
}

using CheckFn = Result (*)(const Context&, std::size_t);

CheckFn generator_check(const std::string& name) {
  if (name == "normalization") return check_normalization;
  if (name == "nonnegativity") return check_nonnegativity;
  if (name == "cdf-consistency") return check_cdf_consistency;
  if (name == "inverse") return check_inverse;
  if (name == "sampler-ks") return check_sampler_ks;
  if (name == "rho") return check_rho;
  return check_kendall;
}

CheckFn copula_check(const std::string& name) {
  static const std::pair<const char*, CheckFn> table[] = {
      {"total-mass", check_total_mass},
      {"margins-ks", check_margins_ks},
      {"marginal", check_marginal},
      {"grounded", check_grounded},
      {"d-increasing", check_d_increasing},
      {"frechet", check_frechet},
      {"lipschitz", check_lipschitz},
      {"exchangeable", check_exchangeable},
      {"hyperplane", check_hyperplane},
      {"partial-bounds", check_partial_bounds},
      {"partial-fd", check_partial_fd},
      {"second-bounds", check_second_bounds},
      {"subvector", check_subvector},
      {"tail", check_tail},
      {"mc-agreement", check_mc_agreement},
      {"empirical", check_empirical},
      {"chi-square", check_chi_square},
  };
  for (const auto& [n, fn] : table) {
    if (name == n) return fn;
  }
  return nullptr;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

bool VerifyReport::all_passed() const {
  return std::all_of(outcomes.begin(), outcomes.end(), [](const CheckOutcome& o) { return o.passed; });
}

std::vector<std::string> VerifyReport::failed_checks() const {
  std::vector<std::string> out;
  for (const auto& o : outcomes) {
    if (!o.passed && !contains(out, o.check)) out.push_back(o.check);
  }
  return out;
}

std::vector<std::string> default_battery() {
  return {"uniform", "piecewise:10", "triangular", "beta:1.5,1.5", "beta:0.5,0.5", "beta:0.5,1.5", "pathology:50"};
}

std::vector<std::string> check_names() {
  std::vector<std::string> out = kGeneratorChecks;
  out.insert(out.end(), kCopulaChecks.begin(), kCopulaChecks.end());
  out.insert(out.end(), kGlobalChecks.begin(), kGlobalChecks.end());
  return out;
}

std::vector<std::string> injection_names() {
  auto out = check_names();
  out.push_back("negate-weight");
  return out;
}

VerifyReport run_verification(const VerifyOptions& options) {
  const auto all = check_names();
  for (const auto& c : options.checks) {
    if (!contains(all, c)) throw ParseError("unknown check '" + c + "'");
  }
  if (!options.inject.empty() && !contains(injection_names(), options.inject)) {
    throw ParseError("unknown injection '" + options.inject + "'");
  }
  for (int d : options.dimensions) {
    if (d < 2) throw ParseError("dimension must be at least 2, got " + std::to_string(d));
  }
  if (options.samples < 10) throw ParseError("verify needs at least 10 samples");
  const auto selected = [&](const std::string& name) { return options.checks.empty() || contains(options.checks, name); };

  const auto specs = options.generators.empty() ? default_battery() : options.generators;
  std::vector<Generator> gens;
  for (const auto& s : specs) {
    Generator g = parse_generator(s);
    if (options.inject == "negate-weight") g = Generator(std::make_shared<NegatedMixtureImpl>(g, 0.25));
    gens.push_back(std::move(g));
  }

  VerifyReport report;
  auto record = [&](const std::string& check, const std::string& gen, int d, auto&& run) {
    CheckOutcome o{check, gen, d, false, ""};
    try {
      const Result r = run();
      o.passed = r.passed;
      o.detail = r.detail;
    } catch (const std::exception& e) {
      o.detail = std::string("error: ") + e.what();
    }
    if (options.on_result) options.on_result(o);
    report.outcomes.push_back(std::move(o));
  };

  for (std::size_t gi = 0; gi < gens.size(); ++gi) {
    const Context gc(options, specs[gi], gens[gi], 0, {}, gi);
    for (std::size_t ci = 0; ci < kGeneratorChecks.size(); ++ci) {
      const auto& name = kGeneratorChecks[ci];
      if (!selected(name)) continue;
      record(name, specs[gi], 0, [&] { return generator_check(name)(gc, ci); });
    }
    for (int d : options.dimensions) {
      std::vector<int> signs;
      if (options.signs.size() == static_cast<std::size_t>(d)) signs = options.signs;
      const Context cc(options, specs[gi], gens[gi], d, signs, gi);
      for (std::size_t ci = 0; ci < kCopulaChecks.size(); ++ci) {
        const auto& name = kCopulaChecks[ci];
        if (!selected(name)) continue;
        record(name, specs[gi], d, [&] { return copula_check(name)(cc, kGeneratorChecks.size() + ci); });
      }
    }
  }
  if (selected("unbounded")) record("unbounded", "pathology", 0, [&] { return check_unbounded(options); });
  return report;
}

}  // namespace modcop
