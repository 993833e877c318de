#include "mexpr/error.hpp"

namespace mexpr {

std::string_view to_token(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDegenerateLandmarks: return "DegenerateLandmarks";
    case ErrorCode::kPanelTooSmall: return "PanelTooSmall";
    case ErrorCode::kSideTooSmall: return "SideTooSmall";
    case ErrorCode::kSpecOutOfBounds: return "SpecOutOfBounds";
    case ErrorCode::kUnreadableMedia: return "UnreadableMedia";
    case ErrorCode::kZeroFrames: return "ZeroFrames";
    case ErrorCode::kEmptyPerformance: return "EmptyPerformance";
    case ErrorCode::kAdapterUnavailable: return "AdapterUnavailable";
    case ErrorCode::kAdapterProtocolError: return "AdapterProtocolError";
    case ErrorCode::kEngineFailure: return "EngineFailure";
    case ErrorCode::kEngineUnknown: return "EngineUnknown";
    case ErrorCode::kInvalidSource: return "InvalidSource";
    case ErrorCode::kInvalidIndex: return "InvalidIndex";
    case ErrorCode::kFrameNotGenerated: return "FrameNotGenerated";
    case ErrorCode::kParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::kNothingSelected: return "NothingSelected";
    case ErrorCode::kStaleSelection: return "StaleSelection";
    case ErrorCode::kSessionCommitted: return "SessionCommitted";
    case ErrorCode::kInvalidState: return "InvalidState";
    case ErrorCode::kMismatchedPanel: return "MismatchedPanel";
    case ErrorCode::kIOFailure: return "IOFailure";
    case ErrorCode::kIntegrityError: return "IntegrityError";
    case ErrorCode::kMissingManifest: return "MissingManifest";
    case ErrorCode::kVersionUnsupported: return "VersionUnsupported";
    case ErrorCode::kNotFound: return "NotFound";
  }
  return "Unknown";
}

bool is_retryable(ErrorCode code) {
  return code == ErrorCode::kEngineFailure || code == ErrorCode::kAdapterUnavailable ||
         code == ErrorCode::kIOFailure;
}

}  // namespace mexpr
