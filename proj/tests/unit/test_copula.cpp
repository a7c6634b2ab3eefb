#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "doctest.h"
#include "modcop/copula.hpp"
#include "modcop/errors.hpp"
#include "modcop/generator_parse.hpp"
#include "modcop/stats.hpp"

using namespace modcop;

namespace {

using Cdf1 = std::function<double(double)>;

// G(x) = floor(x) + F(frac x): the cdf of X extended periodically.
double periodic_cdf(const Cdf1& F, double x) {
  const double fl = std::floor(x);
  return fl + F(x - fl);
}

double gk(const std::function<double(double)>& f, double a, double b, std::vector<double> cuts = {}) {
  cuts.push_back(a);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = std::clamp(cuts[i], a, b), hi = std::clamp(cuts[i + 1], a, b);
    if (hi > lo) total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 10, 1e-12);
  }
  return total;
}

// C(u1, u2) = int_0^u1 [G(v + u2) - G(v)] dv, since P(U2 <= u2 | U1 = v) is
// P((X - v) mod 1 <= u2).
double cdf2_oracle(const Cdf1& F, double u1, double u2) {
  return gk([&](double v) { return periodic_cdf(F, v + u2) - periodic_cdf(F, v); }, 0.0, u1, {1.0 - u2});
}

// Same idea one level deeper: C(u) = int int [G(v1 + v2 + u3) - G(v1 + v2)] dv2 dv1.
double cdf3_oracle(const Cdf1& F, double u1, double u2, double u3) {
  return gk(
      [&](double v1) {
        return gk([&](double v2) { return periodic_cdf(F, v1 + v2 + u3) - periodic_cdf(F, v1 + v2); }, 0.0, u2,
                  {1.0 - u3 - v1, 1.0 - v1, 2.0 - u3 - v1});
      },
      0.0, u1, {1.0 - u3 - u2, 1.0 - u2, 1.0 - u3, 2.0 - u2 - u3});
}

double exact(const CopulaModel& m, const std::vector<double>& u) {
  CdfOptions o;
  o.method = CdfMethod::exact;
  return cdf(m, u, o).value;
}

std::vector<double> random_point(std::mt19937_64& gen, int d, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> u(d);
  for (double& x : u) x = dist(gen);
  return u;
}

const char* const kBattery[] = {"uniform", "piecewise:10", "triangular", "beta:1.5,1.5",
                                "beta:0.5,0.5", "beta:0.5,1.5", "pathology:50"};

}  // namespace

TEST_CASE("model construction") {
  const Generator g = parse_generator("triangular");
  CHECK(CopulaModel(3, g).id() == "triangular;d=3");
  CHECK(CopulaModel(3, g, {0, 1, 0}).id() == "triangular;d=3;signs=010");
  CHECK_FALSE(CopulaModel(3, g, {0, 0, 0}).is_signed());
  CHECK_THROWS_AS(CopulaModel(1, g), DomainError);
  CHECK_THROWS_AS(CopulaModel(3, g, {0, 1}), DomainError);
  CHECK_THROWS_AS(CopulaModel(2, g, {0, 2}), DomainError);
}

TEST_CASE("density is f of the coordinate sum mod 1") {
  const Generator g = parse_generator("beta:2,5");
  const CopulaModel m(3, g);
  const CopulaModel s(3, g, {0, 1, 1});
  std::mt19937_64 gen(1);
  for (int i = 0; i < 200; ++i) {
    const auto u = random_point(gen, 3);
    const double t = u[0] + u[1] + u[2];
    CHECK(density(m, u) == doctest::Approx(g.density(t - std::floor(t))).epsilon(1e-12));
    const double r = u[0] - u[1] - u[2];
    CHECK(density(s, u) == doctest::Approx(g.density(r - std::floor(r))).epsilon(1e-12));
  }
  CHECK_THROWS_AS(density(m, std::vector<double>{0.1, 0.2}), DomainError);
  CHECK_THROWS_AS(density(m, std::vector<double>{0.1, 0.2, 1.5}), DomainError);
}

TEST_CASE("hyperplane constancy is exact") {
  const CopulaModel m(4, parse_generator("pathology:20"));
  std::mt19937_64 gen(2);
  for (int i = 0; i < 100; ++i) {
    // Dyadic coordinates so that redistributing mass keeps the sum exact.
    auto u = random_point(gen, 4, 0.05, 0.95);
    for (double& x : u) x = std::ldexp(std::round(std::ldexp(x, 20)), -20);
    auto v = u;
    const double shift = std::ldexp(1.0, -10);
    v[0] += shift;
    v[3] -= shift;
    CHECK(density(m, u) == density(m, v));
  }
}

TEST_CASE("exact cdf matches an independent quadrature oracle, d = 2") {
  const Cdf1 sq = [](double x) { return x * x; };
  const Cdf1 b = [](double x) { return boost::math::ibeta(2.0, 5.0, x); };
  const CopulaModel tri(2, parse_generator("triangular"));
  const CopulaModel beta(2, parse_generator("beta:2,5"));
  std::mt19937_64 gen(3);
  for (int i = 0; i < 40; ++i) {
    const auto u = random_point(gen, 2);
    CAPTURE(u[0]);
    CAPTURE(u[1]);
    CHECK(exact(tri, u) == doctest::Approx(cdf2_oracle(sq, u[0], u[1])).epsilon(1e-11));
    CHECK(exact(beta, u) == doctest::Approx(cdf2_oracle(b, u[0], u[1])).epsilon(1e-11));
  }
}

TEST_CASE("exact cdf matches an independent quadrature oracle, d = 3") {
  const Cdf1 sq = [](double x) { return x * x; };
  const CopulaModel tri(3, parse_generator("triangular"));
  std::mt19937_64 gen(4);
  for (int i = 0; i < 8; ++i) {
    const auto u = random_point(gen, 3);
    CHECK(exact(tri, u) == doctest::Approx(cdf3_oracle(sq, u[0], u[1], u[2])).epsilon(1e-10));
  }
}

TEST_CASE("exact cdf agrees with Monte Carlo") {
  for (int d : {2, 3, 4}) {
    for (const char* spec : {"beta:1.5,1.5", "beta:0.5,0.5", "piecewise:10", "pathology:50"}) {
      CAPTURE(d);
      CAPTURE(spec);
      const CopulaModel m(d, parse_generator(spec));
      std::mt19937_64 gen(static_cast<unsigned>(d));
      int beyond3 = 0;
      for (int i = 0; i < 10; ++i) {
        const auto u = random_point(gen, d, 0.2, 1.0);
        CdfOptions o;
        o.method = CdfMethod::monte_carlo;
        o.mc_samples = 100000;
        o.seed = static_cast<std::uint64_t>(i);
        const auto mc = cdf(m, u, o);
        const double ex = exact(m, u);
        const double z = std::abs(mc.value - ex) / std::max(mc.error_estimate, 1e-12);
        CHECK(z < 5.0);
        if (z > 3.0) ++beyond3;
      }
      CHECK(beyond3 <= 1);
    }
  }
}

TEST_CASE("copula axioms") {
  for (const char* spec : kBattery) {
    for (int d : {2, 3}) {
      CAPTURE(spec);
      CAPTURE(d);
      const CopulaModel m(d, parse_generator(spec));
      std::mt19937_64 gen(5);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      // Margins and groundedness.
      for (int j = 0; j < d; ++j) {
        const double t = unit(gen);
        std::vector<double> u(d, 1.0);
        u[j] = t;
        CHECK(std::abs(exact(m, u) - t) <= 1e-9);
        auto z = random_point(gen, d);
        z[j] = 0.0;
        CHECK(exact(m, z) == 0.0);
      }
      std::vector<double> ones(d, 1.0);
      CHECK(exact(m, ones) == doctest::Approx(1.0).epsilon(1e-10));
      for (int i = 0; i < 10; ++i) {
        const auto u = random_point(gen, d);
        const auto v = random_point(gen, d);
        const double cu = exact(m, u), cv = exact(m, v);
        // Frechet-Hoeffding bounds.
        double lower = 1.0 - d;
        for (double x : u) lower += x;
        CHECK(cu >= std::max(lower, 0.0) - 1e-10);
        CHECK(cu <= *std::min_element(u.begin(), u.end()) + 1e-10);
        // 1-Lipschitz in the L1 norm.
        double l1 = 0.0;
        for (int k = 0; k < d; ++k) l1 += std::abs(u[k] - v[k]);
        CHECK(std::abs(cu - cv) <= l1 + 1e-10);
        // Rectangle volume.
        std::vector<double> lo(d), hi(d);
        for (int k = 0; k < d; ++k) {
          lo[k] = std::min(u[k], v[k]);
          hi[k] = std::max(u[k], v[k]);
        }
        double vol = 0.0;
        for (int mask = 0; mask < (1 << d); ++mask) {
          std::vector<double> corner(d);
          int lows = 0;
          for (int k = 0; k < d; ++k) {
            const bool low = (mask >> k) & 1;
            corner[k] = low ? lo[k] : hi[k];
            lows += low;
          }
          vol += (lows % 2 ? -1.0 : 1.0) * exact(m, corner);
        }
        CHECK(vol >= -1e-7);
      }
    }
  }
}

TEST_CASE("cdf and density are exchangeable") {
  const CopulaModel m(3, parse_generator("beta:0.5,1.5"));
  std::mt19937_64 gen(6);
  for (int i = 0; i < 10; ++i) {
    auto u = random_point(gen, 3);
    const double c = exact(m, u), f = density(m, u);
    std::sort(u.begin(), u.end());
    do {
      CHECK(exact(m, u) == doctest::Approx(c).epsilon(1e-10));
      CHECK(density(m, u) == doctest::Approx(f).epsilon(1e-12));
    } while (std::next_permutation(u.begin(), u.end()));
  }
}

TEST_CASE("Lipschitz fails in the sup norm for the independence copula") {
  // C(u) = u1 u2 moves by 2h - h^2 when both coordinates move by h.
  const CopulaModel pi(2, parse_generator("uniform"));
  const double h = 0.1;
  const double jump = exact(pi, {1.0, 1.0}) - exact(pi, {1.0 - h, 1.0 - h});
  CHECK(jump == doctest::Approx(2 * h - h * h));
  CHECK(jump > h);
}

TEST_CASE("uniform generator gives the independence copula") {
  const CopulaModel pi(4, parse_generator("uniform"));
  std::mt19937_64 gen(7);
  for (int i = 0; i < 20; ++i) {
    const auto u = random_point(gen, 4);
    CHECK(exact(pi, u) == doctest::Approx(u[0] * u[1] * u[2] * u[3]).epsilon(1e-12));
  }
}

TEST_CASE("first partial derivatives") {
  for (const char* spec : {"beta:1.5,1.5", "beta:2,5", "triangular"}) {
    for (int d : {2, 3, 4}) {
      CAPTURE(spec);
      CAPTURE(d);
      const CopulaModel m(d, parse_generator(spec));
      std::mt19937_64 gen(8);
      for (int i = 0; i < 5; ++i) {
        auto u = random_point(gen, d, 0.05, 0.95);
        for (int j = 0; j < d; ++j) {
          const double p = partial_derivative(m, u, j);
          CHECK(p >= 0.0);
          CHECK(p <= 1.0);
          const double h = 1e-4;
          auto up = u, dn = u;
          up[j] += h;
          dn[j] -= h;
          const double fd = (exact(m, up) - exact(m, dn)) / (2 * h);
          CHECK(std::abs(p - fd) <= 1e-6);
        }
      }
    }
  }
}

TEST_CASE("partial derivatives stay in [0, 1] for singular generators") {
  for (const char* spec : {"beta:0.5,0.5", "pathology:50", "piecewise:10"}) {
    const CopulaModel m(3, parse_generator(spec));
    std::mt19937_64 gen(9);
    for (int i = 0; i < 30; ++i) {
      const auto u = random_point(gen, 3, 1e-6, 1.0 - 1e-6);
      for (int j = 0; j < 3; ++j) {
        const double p = partial_derivative(m, u, j);
        CHECK(p >= -1e-9);
        CHECK(p <= 1.0 + 1e-9);
      }
    }
  }
}

TEST_CASE("second partial derivatives") {
  const CopulaModel m(3, parse_generator("beta:2,5"));
  std::mt19937_64 gen(10);
  for (int i = 0; i < 5; ++i) {
    const auto u = random_point(gen, 3, 0.05, 0.95);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const double s = second_partial(m, u, a, b);
        CHECK(s >= -1.0 - 1e-9);
        CHECK(s <= 1.0 + 1e-9);
        const double h = 1e-4;
        auto up = u, dn = u;
        up[b] += h;
        dn[b] -= h;
        const double fd = (partial_derivative(m, up, a) - partial_derivative(m, dn, a)) / (2 * h);
        CHECK(std::abs(s - fd) <= 1e-6);
      }
    }
    CHECK(second_partial(m, u, 0, 1) == doctest::Approx(second_partial(m, u, 1, 0)).epsilon(1e-10));
  }
}

TEST_CASE("derivative preconditions") {
  const CopulaModel m2(2, parse_generator("triangular"));
  const CopulaModel m3(3, parse_generator("triangular"));
  CHECK_THROWS_AS(partial_derivative(m2, std::vector<double>{0.0, 0.5}, 0), BoundaryError);
  CHECK_THROWS_AS(partial_derivative(m2, std::vector<double>{0.5, 1.0}, 1), BoundaryError);
  CHECK_NOTHROW(partial_derivative(m2, std::vector<double>{0.5, 1.0}, 0));
  CHECK_THROWS_AS(partial_derivative(m2, std::vector<double>{0.5, 0.5}, 2), DomainError);
  CHECK_THROWS_AS(second_partial(m2, std::vector<double>{0.5, 0.5}, 0, 1), UnsupportedDimensionError);
  CHECK_THROWS_AS(second_partial(m3, std::vector<double>{0.5, 0.0, 0.5}, 0, 1), BoundaryError);
  CdfOptions o;
  o.method = CdfMethod::exact;
  const CopulaModel big(13, parse_generator("uniform"));
  CHECK_THROWS_AS(cdf(big, std::vector<double>(13, 0.5), o), UnsupportedDimensionError);
  o.method = CdfMethod::automatic;
  o.mc_samples = 1000;
  CHECK(cdf(big, std::vector<double>(13, 0.5), o).method == CdfMethod::monte_carlo);
}

TEST_CASE("signed models") {
  const Generator g = parse_generator("beta:1.5,1.5");
  for (const std::vector<int>& signs : {std::vector<int>{0, 1}, std::vector<int>{1, 1}, std::vector<int>{0, 1, 1},
                                        std::vector<int>{1, 0, 1}}) {
    const int d = static_cast<int>(signs.size());
    const CopulaModel m(d, g, signs);
    std::mt19937_64 gen(11);
    for (int i = 0; i < 5; ++i) {
      const auto u = random_point(gen, d, 0.2, 1.0);
      CdfOptions o;
      o.method = CdfMethod::monte_carlo;
      o.mc_samples = 200000;
      const auto mc = cdf(m, u, o);
      const double ex = exact(m, u);
      CHECK(std::abs(mc.value - ex) <= 5.0 * mc.error_estimate);
      for (int j = 0; j < d; ++j) {
        const double h = 1e-4;
        auto up = u, dn = u;
        up[j] = std::min(up[j] + h, 1.0);
        dn[j] -= h;
        if (up[j] == 1.0) continue;
        const double fd = (exact(m, up) - exact(m, dn)) / (2 * h);
        CHECK(std::abs(partial_derivative(m, u, j) - fd) <= 1e-6);
      }
    }
    // Margins are still uniform.
    std::vector<double> u(d, 1.0);
    u[0] = 0.3;
    CHECK(exact(m, u) == doctest::Approx(0.3).epsilon(1e-10));
  }
}

TEST_CASE("samples have the right law") {
  const Generator g = parse_generator("beta:0.5,1.5");
  const CopulaModel m(3, g);
  const auto s = sample_copula(m, 50000, 4);
  CHECK(s.rows == 50000);
  CHECK(s.cols == 3);
  CHECK(s.model_id == m.id());
  for (std::size_t c = 0; c < 3; ++c) CHECK(ks_uniformity(s.column(c)).p_value > 0.001);
  std::vector<double> sums(s.rows);
  for (std::size_t r = 0; r < s.rows; ++r) {
    const double t = s(r, 0) + s(r, 1) + s(r, 2);
    sums[r] = g.cdf(t - std::floor(t));
  }
  CHECK(ks_uniformity(sums).p_value > 0.001);
}

TEST_CASE("signed samples follow the reflected sum") {
  const Generator g = parse_generator("beta:2,5");
  const CopulaModel m(3, g, {0, 1, 0});
  const auto s = sample_copula(m, 50000, 5);
  std::vector<double> sums(s.rows);
  for (std::size_t r = 0; r < s.rows; ++r) {
    const double t = s(r, 0) - s(r, 1) + s(r, 2);
    sums[r] = g.cdf(t - std::floor(t));
  }
  CHECK(ks_uniformity(sums).p_value > 0.001);
  for (std::size_t c = 0; c < 3; ++c) CHECK(ks_uniformity(s.column(c)).p_value > 0.001);
}

TEST_CASE("sampling does not depend on the thread count") {
  const CopulaModel m(4, parse_generator("pathology:50"));
  const auto a = sample_copula(m, 5000, 6, 1);
  const auto b = sample_copula(m, 5000, 6, 3);
  CHECK(a.values == b.values);
  CHECK(sample_copula(m, 10, 7).values != a.values);
  CHECK_THROWS_AS(sample_copula(m, 0, 1), DomainError);
}

TEST_CASE("bivariate histogram matches exact cell probabilities") {
  const CopulaModel m(2, parse_generator("beta:1.5,1.5"));
  constexpr int k = 10;
  const auto s = sample_copula(m, 200000, 8);
  std::vector<double> observed(k * k, 0.0), expected(k * k, 0.0);
  for (std::size_t r = 0; r < s.rows; ++r) {
    const int a = std::min(k - 1, static_cast<int>(s(r, 0) * k));
    const int b = std::min(k - 1, static_cast<int>(s(r, 1) * k));
    observed[a * k + b] += 1.0;
  }
  auto C = [&](int a, int b) { return exact(m, {a / double(k), b / double(k)}); };
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const double p = C(a + 1, b + 1) - C(a, b + 1) - C(a + 1, b) + C(a, b);
      expected[a * k + b] = p * static_cast<double>(s.rows);
    }
  }
  CHECK(chi_square_gof(observed, expected).p_value > 0.001);
}

TEST_CASE("checkerboard density") {
  CHECK(checkerboard_density(std::vector<double>{0.25, 0.25}) == 2.0);
  CHECK(checkerboard_density(std::vector<double>{0.25, 0.75}) == 0.0);
  CHECK(checkerboard_density(std::vector<double>{0.9, 0.9}) == 2.0);
  CHECK(checkerboard_density(std::vector<double>{0.75, 0.25}) == 0.0);
  CHECK_THROWS_AS(checkerboard_density(std::vector<double>{0.5}), DomainError);
  // Uniform margins: each row of a midpoint grid averages to 1.
  constexpr int n = 100;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += checkerboard_density(std::vector<double>{(i + 0.5) / n, (j + 0.5) / n});
    CHECK(row / n == doctest::Approx(1.0));
  }
}
