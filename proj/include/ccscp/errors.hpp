#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccscp {

/// Input that violates a documented invariant. `field()` names the offending
/// quantity using the same path notation as the scenario schema.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Argument outside the mathematical domain of a function (e.g. erf_inv(1)).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The linearization point coincides with the obstacle mean, so the
/// separating direction is undefined.
class DegenerateLinearization : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed JSON input; line and column are 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error("parse error at line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// File system failure; the message carries the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ccscp
