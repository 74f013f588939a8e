#include "homi/error.h"

namespace homi {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "InvalidArgument";
    case ErrorCode::kDegenerateRotation6D:
      return "DegenerateRotation6D";
    case ErrorCode::kEmptyTau:
      return "EmptyTau";
    case ErrorCode::kWindowTooLarge:
      return "WindowTooLarge";
    case ErrorCode::kShapeMismatch:
      return "ShapeMismatch";
    case ErrorCode::kNonFiniteLoss:
      return "NonFiniteLoss";
    case ErrorCode::kBadRatio:
      return "BadRatio";
    case ErrorCode::kBadFactor:
      return "BadFactor";
    case ErrorCode::kBadTauSpec:
      return "BadTauSpec";
    case ErrorCode::kEmptyCloud:
      return "EmptyCloud";
    case ErrorCode::kTooShort:
      return "TooShort";
    case ErrorCode::kInfeasibleScenario:
      return "InfeasibleScenario";
    case ErrorCode::kNonIntegerStride:
      return "NonIntegerStride";
    case ErrorCode::kClipTooShort:
      return "ClipTooShort";
    case ErrorCode::kAnchorMismatch:
      return "AnchorMismatch";
    case ErrorCode::kMissingMarkerTag:
      return "MissingMarkerTag";
    case ErrorCode::kInvalidSkeleton:
      return "InvalidSkeleton";
    case ErrorCode::kSkeletonMismatch:
      return "SkeletonMismatch";
    case ErrorCode::kMissingCheckpoint:
      return "MissingCheckpoint";
    case ErrorCode::kParse:
      return "Parse";
    case ErrorCode::kIo:
      return "Io";
    case ErrorCode::kConfig:
      return "Config";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kBadTauSpec:
    case ErrorCode::kBadRatio:
    case ErrorCode::kBadFactor:
    case ErrorCode::kInvalidArgument:
      return ErrorCategory::kConfig;
    case ErrorCode::kNonFiniteLoss:
    case ErrorCode::kDegenerateRotation6D:
      return ErrorCategory::kNumerical;
    case ErrorCode::kEmptyTau:
    case ErrorCode::kWindowTooLarge:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kEmptyCloud:
    case ErrorCode::kTooShort:
    case ErrorCode::kInfeasibleScenario:
    case ErrorCode::kNonIntegerStride:
    case ErrorCode::kClipTooShort:
    case ErrorCode::kAnchorMismatch:
    case ErrorCode::kMissingMarkerTag:
    case ErrorCode::kInvalidSkeleton:
    case ErrorCode::kSkeletonMismatch:
    case ErrorCode::kMissingCheckpoint:
    case ErrorCode::kParse:
    case ErrorCode::kIo:
      return ErrorCategory::kData;
  }
  return ErrorCategory::kOther;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

} // namespace homi
