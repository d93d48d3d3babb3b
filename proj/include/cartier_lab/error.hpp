#pragma once

#include <stdexcept>
#include <string>

namespace cartier_lab {

enum class ErrorCode {
  kValidation,
  kContextMismatch,
  kDivisionByZero,
  kDimensionMismatch,
  kUnsupported,
  kCapExceeded,
  kNonStabilized,
  kNonRegular,
  kCertificateFailed,
  kInvariantViolation,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return "VALIDATION";
    case ErrorCode::kContextMismatch: return "CONTEXT_MISMATCH";
    case ErrorCode::kDivisionByZero: return "DIVISION_BY_ZERO";
    case ErrorCode::kDimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::kUnsupported: return "UNSUPPORTED";
    case ErrorCode::kCapExceeded: return "CAP_EXCEEDED";
    case ErrorCode::kNonStabilized: return "NON_STABILIZED";
    case ErrorCode::kNonRegular: return "NON_REGULAR";
    case ErrorCode::kCertificateFailed: return "CERTIFICATE_FAILED";
    case ErrorCode::kInvariantViolation: return "INVARIANT_VIOLATION";
  }
  return "UNKNOWN";
}

class CartierError : public std::runtime_error {
 public:
  CartierError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw CartierError(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

/// Iteration cap shared by every stabilization loop.
struct StabilizationLimits {
  std::size_t max_iter = 256;
};

enum class StabilizationStatus { kStabilized, kNonStabilized };

}  // namespace cartier_lab
