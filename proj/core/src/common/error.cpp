#include "dr/error.hpp"

namespace dr {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kTransport: return "transport_error";
    case ErrorCode::kNoMatch: return "no_match";
    case ErrorCode::kAmbiguous: return "ambiguous";
    case ErrorCode::kAnchorTooShort: return "anchor_too_short";
    case ErrorCode::kUnknownId: return "unknown_id";
    case ErrorCode::kUndecodableImage: return "undecodable_image";
    case ErrorCode::kBudgetExhausted: return "budget_exhausted";
    case ErrorCode::kNoEligibleSeed: return "no_eligible_seed";
    case ErrorCode::kGraphTooSmall: return "graph_too_small";
    case ErrorCode::kContractUnsatisfiable: return "contract_unsatisfiable";
    case ErrorCode::kInsufficientFacts: return "insufficient_facts";
    case ErrorCode::kStageFailed: return "stage_failed";
    case ErrorCode::kRubricRejected: return "rubric_rejected";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kNoPositiveRubric: return "no_positive_rubric";
    case ErrorCode::kUnknownVerdict: return "unknown_verdict";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kLeaseExpired: return "lease_expired";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kMissingReport: return "missing_report";
  }
  return "unknown";
}

}  // namespace dr
