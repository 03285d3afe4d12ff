#pragma once

#include <stdexcept>
#include <string>

namespace szego {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of an operation (beta outside (0,1),
/// eigenvalue outside a functional's domain, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A fractal construction was asked for more generations than can be
/// represented (interval lengths underflow, or the interval count explodes).
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Internal invariant violated (overlapping copies, unsorted data, ...).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Quadrature, eigensolver or sweep did not reach its tolerance.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double achieved = 0.0)
      : Error(what), achieved_(achieved) {}
  double achieved_tolerance() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Assembled matrix would exceed the configured memory budget.
class SizeError : public Error {
 public:
  SizeError(const std::string& what, double suggested_lambda)
      : Error(what), suggested_lambda_(suggested_lambda) {}
  double suggested_lambda() const noexcept { return suggested_lambda_; }

 private:
  double suggested_lambda_;
};

/// Operation not supported for the given input class (non-projection
/// symbol, non-box geometry, ...).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Eigenvalues of a projection compression left [0,1] by more than the
/// clamp tolerance.
class SpectrumError : public Error {
 public:
  using Error::Error;
};

/// f(0) != 0 while the symbol vanishes on a set of infinite measure.
class IntegrabilityError : public Error {
 public:
  using Error::Error;
};

/// Regression could not be carried out (too few points, singular design).
class FitError : public Error {
 public:
  using Error::Error;
};

/// Dimension mismatch between arguments.
class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace szego
