#pragma once

#include <stdexcept>
#include <string>

namespace fasec {

/// Invalid scenario, option or config value. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A factorization or log-determinant broke down. `diagnostic` carries a
/// conditioning estimate (or NaN when none is available).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double diagnostic = 0.0)
      : std::runtime_error(what), diagnostic_(diagnostic) {}

  double diagnostic() const noexcept { return diagnostic_; }

 private:
  double diagnostic_;
};

/// Too many Monte Carlo trials failed. The CLI maps it to exit code 3.
class TrialFailureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fasec
