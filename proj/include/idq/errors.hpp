#pragma once

#include <stdexcept>
#include <string>

namespace idq {

enum class ErrorKind {
  kNonConvergence,
  kDimensionMismatch,
  kUnsupportedModel,
  kTauOutOfRange,
  kDomainError,
  kNumericalUnderflow,
  kTooManyCodewords,
  kAdmissibilityViolation,
};

const char* to_string(ErrorKind kind);

/// Numerical failures (as opposed to bad inputs) map to CLI exit code 3.
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace idq
