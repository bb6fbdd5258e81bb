#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace supermarket {

enum class ErrorCode {
  kDomainError,
  kNonConvergence,
  kInstability,
  kSingularSystem,
  kInvalidRepresentation,
  kInvalidArgument,
  kInfiniteMoment,
  kZeroSurvival,
  kUnsupported,
  kNoClosedForm,
  kUnstable,
  kZeroGap,
  kNegativeGap,
  kDegenerateRatio,
  kInsufficientPoints,
  kParseError,
};

std::string_view to_string(ErrorCode code);

// True for errors caused by bad input (CLI exit code 2); false for
// numerical failures (exit code 1).
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace supermarket
