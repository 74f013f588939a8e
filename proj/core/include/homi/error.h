#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace homi {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateRotation6D,
  kEmptyTau,
  kWindowTooLarge,
  kShapeMismatch,
  kNonFiniteLoss,
  kBadRatio,
  kBadFactor,
  kBadTauSpec,
  kEmptyCloud,
  kTooShort,
  kInfeasibleScenario,
  kNonIntegerStride,
  kClipTooShort,
  kAnchorMismatch,
  kMissingMarkerTag,
  kInvalidSkeleton,
  kSkeletonMismatch,
  kMissingCheckpoint,
  kParse,
  kIo,
  kConfig,
};

/// Coarse grouping used by the command-line tool to pick an exit status.
enum class ErrorCategory { kConfig, kData, kNumerical, kOther };

std::string_view to_string(ErrorCode code);
ErrorCategory category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept {
    return code_;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

} // namespace homi

#define HOMI_CHECK(cond, code, msg)   \
  do {                                \
    if (!(cond)) {                    \
      ::homi::fail((code), (msg));    \
    }                                 \
  } while (false)
