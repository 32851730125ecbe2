#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mcx {

// Base of every error thrown by the toolkit. `locator` carries the point or
// parameter values that reproduce the failure.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, std::vector<double> locator = {})
      : std::runtime_error(what), locator_(std::move(locator)) {}

  const std::vector<double>& locator() const noexcept { return locator_; }

 private:
  std::vector<double> locator_;
};

// Caller violated an operation's precondition (argument out of range, point
// outside the domain, inconsistent radii, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class AsymmetricMatrixError : public Error {
 public:
  AsymmetricMatrixError(const std::string& what, double asymmetry)
      : Error(what, {asymmetry}), asymmetry_(asymmetry) {}
  double asymmetry() const noexcept { return asymmetry_; }

 private:
  double asymmetry_;
};

// A scalar field threw or returned a non-finite value at a stencil point.
class FieldEvaluationError : public Error {
 public:
  using Error::Error;
};

class NotOnBoundaryError : public Error {
 public:
  NotOnBoundaryError(const std::string& what, double residual, std::vector<double> at)
      : Error(what, std::move(at)), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class SingularPointError : public Error {
 public:
  using Error::Error;
};

// 1 + t*nu <= 0: the transported point sits at or beyond a focal point.
class FocalPointError : public Error {
 public:
  using Error::Error;
};

class ProjectionError : public Error {
 public:
  ProjectionError(const std::string& what, std::vector<double> best, double residual)
      : Error(what, std::move(best)), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// The nearest point is not unique, so a quantity that needs a unique foot
// (gradient, Hessian of the distance) is undefined.
class NonUniqueFootError : public Error {
 public:
  using Error::Error;
};

}  // namespace mcx
