#pragma once

#include <stdexcept>
#include <string>

namespace priorimpact {

/// Invalid argument to a numerical routine (non-positive shape, p outside (0,1), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A mean- or variance-dependent quantity was requested where the moment does not exist.
class UndefinedMoment : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Adaptive quadrature failed to reach its tolerance. Carries the last estimate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double estimate, double error_estimate)
      : std::runtime_error(what), estimate_(estimate), error_estimate_(error_estimate) {}

  double estimate() const noexcept { return estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double estimate_;
  double error_estimate_;
};

/// A ModelCase violates one of its invariants; the message names the condition.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The CDF-integral and quantile-integral Wasserstein routes disagree.
class OracleInconsistency : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Log-log decay fit could not be performed (non-positive values, too few points).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace priorimpact
