#include "supermarket/error.hpp"

namespace supermarket {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kInstability: return "Instability";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kInvalidRepresentation: return "InvalidRepresentation";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInfiniteMoment: return "InfiniteMoment";
    case ErrorCode::kZeroSurvival: return "ZeroSurvival";
    case ErrorCode::kUnsupported: return "Unsupported";
    case ErrorCode::kNoClosedForm: return "NoClosedForm";
    case ErrorCode::kUnstable: return "Unstable";
    case ErrorCode::kZeroGap: return "ZeroGap";
    case ErrorCode::kNegativeGap: return "NegativeGap";
    case ErrorCode::kDegenerateRatio: return "DegenerateRatio";
    case ErrorCode::kInsufficientPoints: return "InsufficientPoints";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomainError:
    case ErrorCode::kInvalidRepresentation:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInfiniteMoment:
    case ErrorCode::kUnsupported:
    case ErrorCode::kNoClosedForm:
    case ErrorCode::kUnstable:
    case ErrorCode::kParseError:
      return true;
    default:
      return false;
  }
}

}  // namespace supermarket
