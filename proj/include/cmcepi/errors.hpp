#pragma once

#include <stdexcept>
#include <string>

namespace cmcepi {

/// Malformed input: bad pmf, bad law parameters, bad config.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mathematically undefined request, e.g. size-biasing with a zero normalizer.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Fixed-point iteration hit its cap without settling.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Monte Carlo estimator ran out of samples for a quantity it must report.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cmcepi
