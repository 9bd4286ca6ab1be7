#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace padia {

enum class ErrorCode {
  kNonEmptyMarkedSetRequired,
  kInvalidItemCount,
  kTooManyMarked,
  kDomain,
  kInvalidArgument,
  kNormDriftExceeded,
  kCapacityExceeded,
  kConvergenceFailure,
  kDegenerateFit,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonEmptyMarkedSetRequired: return "NonEmptyMarkedSetRequired";
    case ErrorCode::kInvalidItemCount: return "InvalidItemCount";
    case ErrorCode::kTooManyMarked: return "TooManyMarked";
    case ErrorCode::kDomain: return "DomainError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNormDriftExceeded: return "NormDriftExceeded";
    case ErrorCode::kCapacityExceeded: return "CapacityExceeded";
    case ErrorCode::kConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::kDegenerateFit: return "DegenerateFit";
  }
  return "Unknown";
}

// All library failures are reported through this one exception type; the
// code distinguishes usage errors from numerical ones.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace padia
