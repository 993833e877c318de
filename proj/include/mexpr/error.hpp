#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mexpr {

// Every failure the pipeline reports carries one of these codes. The token
// spelling is part of the service wire contract.
enum class ErrorCode {
  kInvalidArgument,
  kDegenerateLandmarks,
  kPanelTooSmall,
  kSideTooSmall,
  kSpecOutOfBounds,
  kUnreadableMedia,
  kZeroFrames,
  kEmptyPerformance,
  kAdapterUnavailable,
  kAdapterProtocolError,
  kEngineFailure,
  kEngineUnknown,
  kInvalidSource,
  kInvalidIndex,
  kFrameNotGenerated,
  kParamOutOfRange,
  kNothingSelected,
  kStaleSelection,
  kSessionCommitted,
  kInvalidState,
  kMismatchedPanel,
  kIOFailure,
  kIntegrityError,
  kMissingManifest,
  kVersionUnsupported,
  kNotFound,
};

std::string_view to_token(ErrorCode code);

// Retryable errors may succeed if the same request is issued again.
bool is_retryable(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view token() const { return to_token(code_); }
  bool retryable() const { return is_retryable(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace mexpr
