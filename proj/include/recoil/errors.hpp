#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace recoil {

/// Precondition violation on an argument (non-positive temperature, bad grid, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed to converge or hit a step-size floor.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Measured inputs admit no solution within the model's range.
class InconsistencyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// File could not be opened, read, or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or invalid value. `line()` is 0 when the error is not
/// tied to a particular line (e.g. validation of the assembled parameters).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::string field = {})
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace recoil
