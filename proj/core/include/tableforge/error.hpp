#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tableforge {

enum class ErrorCode {
  kSchemaError,
  kDimensionMismatch,
  kDuplicateSibling,
  kPathNotFound,
  kPathNotLeaf,
  kMetricsInvalid,
  kScaleInvalid,
  kRegionNotFound,
  kParseError,
  kAmbiguousPath,
  kIndexOutOfRange,
  kCategoryInapplicable,
  kNonNumericOperand,
  kRatioInvalid,
  kEmptyManifest,
  kRateInvalid,
  kUnknownInstance,
  kPatchInvalid,
  kOutOfBounds,
  kNoValidLines,
  kEmptyInput,
  kBackendTimeout,
  kBackendError,
  kAnswerMissing,
  kTooFewRuns,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Error(ErrorCode code, const std::string& message, std::size_t offset)
      : std::runtime_error(std::string(to_string(code)) + " at " + std::to_string(offset) + ": " +
                           message),
        code_(code),
        offset_(offset) {}

  ErrorCode code() const noexcept { return code_; }

  // Byte offset for parse errors, item index for batch operations.
  std::optional<std::size_t> offset() const noexcept { return offset_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> offset_;
};

}  // namespace tableforge
