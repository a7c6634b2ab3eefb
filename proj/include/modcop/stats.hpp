#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "modcop/copula.hpp"
#include "modcop/generators.hpp"

namespace modcop {

/// Rank-based estimator C_n(u) = (1/n) sum_k 1{R_k^j <= n u_j for all j}.
class EmpiricalCopula {
 public:
  /// Ranks each column; ties are broken by row index. Throws DomainError for
  /// an empty matrix.
  explicit EmpiricalCopula(const SampleMatrix& data);

  std::size_t size() const noexcept { return n_; }
  std::size_t dimension() const noexcept { return d_; }
  /// Rank (1..n) of row r in column c.
  std::size_t rank(std::size_t r, std::size_t c) const { return ranks_[r * d_ + c]; }

  double operator()(std::span<const double> u) const;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<std::size_t> ranks_;
};

/// 1-based ranks of x, ties broken by position.
std::vector<std::size_t> ranks(std::span<const double> x);

/// 6 E[X(1-X)] - 1 for X ~ g: Spearman's rho of the bivariate copula.
double spearman_rho_closed_form(const Generator& g, double tolerance = 1e-12);

/// E[X^k] for X ~ g, by quadrature.
double generator_moment(const Generator& g, int k, double tolerance = 1e-12);

struct RhoResult {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Pearson correlation of the rank columns i and j. Needs n >= 3; throws
/// UndefinedCorrelationError when either column is constant.
RhoResult spearman_rho_sample(const SampleMatrix& data, std::size_t i, std::size_t j);

/// Kendall's tau-a of columns i and j (Knight's O(n log n) algorithm).
double kendall_tau_sample(const SampleMatrix& data, std::size_t i, std::size_t j);
double kendall_tau(std::span<const double> x, std::span<const double> y);

struct TailPoint {
  double t = 0.0;
  double ratio = 0.0;  ///< C(t, ..., t) / t^(d-1)
  double bound = 0.0;  ///< d^(d-1) / (d-1)! * F(t d)
};

/// Throws DomainError unless every t lies in (0, 1/d].
std::vector<TailPoint> tail_diagnostic(const CopulaModel& m, std::span<const double> t_values);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

/// One-sample Kolmogorov-Smirnov test against Uniform(0, 1). Needs n >= 10.
KsResult ks_uniformity(std::span<const double> sample);

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

/// Pearson chi-square of observed counts against expected counts; cells with
/// zero expectation must also be empty. Degrees of freedom: cells - 1 - fitted.
ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> expected, int fitted = 0);

}  // namespace modcop
