#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fwm {

/// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition on a caller-supplied value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Configuration document failed validation; `field` is a dotted path.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string field, const std::string& message)
      : InvalidArgument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A frequency left the range where a dispersion polynomial is trusted.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Root not found, fit did not converge, decomposition failed, ...
class NumericError : public Error {
 public:
  using Error::Error;
};

struct TargetResidual {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool ok = false;
};

class CalibrationError : public NumericError {
 public:
  CalibrationError(const std::string& message, std::vector<TargetResidual> residuals)
      : NumericError(message), residuals_(std::move(residuals)) {}
  const std::vector<TargetResidual>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<TargetResidual> residuals_;
};

}  // namespace fwm
