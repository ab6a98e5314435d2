#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tfw {

/// Argument lies on a pole of the function being evaluated.
class PoleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Result is not representable as a finite double.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// An iterative or quadrature scheme could not reach the requested accuracy.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}

  /// Best accuracy estimate the scheme could certify.
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// A trajectory left the representable range (NaN or |v| above the guard).
class GuardError : public std::runtime_error {
 public:
  GuardError(const std::string& what, std::size_t step, std::size_t mode)
      : std::runtime_error(what), step_(step), mode_(mode) {}

  std::size_t step() const noexcept { return step_; }
  std::size_t mode() const noexcept { return mode_; }

 private:
  std::size_t step_;
  std::size_t mode_;
};

/// Malformed configuration input; `line()` is 1-based, 0 when not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace tfw
