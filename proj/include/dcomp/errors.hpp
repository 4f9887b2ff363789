#pragma once

#include <stdexcept>
#include <string>

namespace dcomp {

/// Argument outside the domain of a formula (v <= 0, d = 0, n = 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Quadrature that failed to converge, servo divergence and similar.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate least-squares problem or data that cannot be fitted.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario file problem. key() is the dotted key path, empty when the
/// error is not tied to a single key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& reason)
      : std::runtime_error(key.empty() ? reason : key + ": " + reason), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace dcomp
