#include "idq/errors.hpp"

namespace idq {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNonConvergence: return "NonConvergence";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kUnsupportedModel: return "UnsupportedModel";
    case ErrorKind::kTauOutOfRange: return "TauOutOfRange";
    case ErrorKind::kDomainError: return "DomainError";
    case ErrorKind::kNumericalUnderflow: return "NumericalUnderflow";
    case ErrorKind::kTooManyCodewords: return "TooManyCodewords";
    case ErrorKind::kAdmissibilityViolation: return "AdmissibilityViolation";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) {
  return kind == ErrorKind::kNonConvergence ||
         kind == ErrorKind::kNumericalUnderflow;
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what),
      kind_(kind) {}

}  // namespace idq
