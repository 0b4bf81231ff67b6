#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maternfi {

// Argument outside the mathematical domain of a function (x <= 0, nu < 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Result not representable as a finite double.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate, double error_estimate)
      : std::runtime_error(what), estimate_(estimate), error_estimate_(error_estimate) {}

  double estimate() const noexcept { return estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double estimate_;
  double error_estimate_;
};

// Raised instead of returning a value whose accuracy cannot be vouched for.
class PrecisionWarning : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid sampling design (duplicate points, points outside the region, bad counts).
class DesignError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Cholesky factorization of a covariance matrix failed.
class FactorizationError : public std::runtime_error {
 public:
  explicit FactorizationError(const std::string& what) : std::runtime_error(what) {}
  FactorizationError(const std::string& what, std::size_t i, std::size_t j)
      : std::runtime_error(what), has_pair_(true), first_(i), second_(j) {}

  // True when the failure was traced to a pair of coincident locations.
  bool has_offending_pair() const noexcept { return has_pair_; }
  std::size_t first() const noexcept { return first_; }
  std::size_t second() const noexcept { return second_; }

 private:
  bool has_pair_ = false;
  std::size_t first_ = 0;
  std::size_t second_ = 0;
};

// Fisher information matrix too ill-conditioned to invert.
class SingularInformationError : public std::runtime_error {
 public:
  SingularInformationError(const std::string& what, double rcond)
      : std::runtime_error(what), rcond_(rcond) {}

  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

// Invalid user-supplied configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// File could not be read, parsed or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace maternfi
