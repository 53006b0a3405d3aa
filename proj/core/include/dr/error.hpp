#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dr {

// Stable, machine-readable error categories. The CLI prints these verbatim.
enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kIo,
  kNotFound,
  kTransport,
  // toolkit
  kNoMatch,
  kAmbiguous,
  kAnchorTooShort,
  kUnknownId,
  kUndecodableImage,
  // retrieval
  kBudgetExhausted,
  // synthesis
  kNoEligibleSeed,
  kGraphTooSmall,
  kContractUnsatisfiable,
  kInsufficientFacts,
  kStageFailed,
  kRubricRejected,
  // reward / eval
  kLengthMismatch,
  kNoPositiveRubric,
  kUnknownVerdict,
  kOutOfRange,
  // service
  kLeaseExpired,
  kConflict,
  kMissingReport,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dr
