#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ckd {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input, configuration, or data that violates a schema contract.
// The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A model or payload was produced under a different schema than the one in use.
class SchemaMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Validation failure attributable to one named input field (feature or column).
class FieldError : public ValidationError {
 public:
  enum class Reason { Missing, UnknownCategory, Invalid };
  FieldError(Reason reason, std::string field, const std::string& message)
      : ValidationError(message), reason_(reason), field_(std::move(field)) {}
  [[nodiscard]] Reason reason() const { return reason_; }
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  Reason reason_;
  std::string field_;
};

// An iterative solver failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace ckd
