#pragma once

#include <stdexcept>
#include <string>

namespace modcop {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A derivative was requested at a coordinate in {0, 1}.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimensionError : public Error {
 public:
  using Error::Error;
};

/// Zero-length edges and similar inputs without a density.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// A search ran out of iterations before reaching its target.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// A result landed outside its mathematically guaranteed range. Signals a bug.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Correlation of a constant column.
class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

/// Quadrature did not meet its tolerance; carries the best estimate reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_estimate, double error_estimate)
      : Error(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_estimate_;
  double error_estimate_;
};

/// Malformed generator description or command-line value.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace modcop
