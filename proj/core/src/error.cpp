#include "tableforge/error.hpp"

namespace tableforge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kDuplicateSibling: return "DuplicateSibling";
    case ErrorCode::kPathNotFound: return "PathNotFound";
    case ErrorCode::kPathNotLeaf: return "PathNotLeaf";
    case ErrorCode::kMetricsInvalid: return "MetricsInvalid";
    case ErrorCode::kScaleInvalid: return "ScaleInvalid";
    case ErrorCode::kRegionNotFound: return "RegionNotFound";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kAmbiguousPath: return "AmbiguousPath";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kCategoryInapplicable: return "CategoryInapplicable";
    case ErrorCode::kNonNumericOperand: return "NonNumericOperand";
    case ErrorCode::kRatioInvalid: return "RatioInvalid";
    case ErrorCode::kEmptyManifest: return "EmptyManifest";
    case ErrorCode::kRateInvalid: return "RateInvalid";
    case ErrorCode::kUnknownInstance: return "UnknownInstance";
    case ErrorCode::kPatchInvalid: return "PatchInvalid";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kNoValidLines: return "NoValidLines";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kBackendTimeout: return "BackendTimeout";
    case ErrorCode::kBackendError: return "BackendError";
    case ErrorCode::kAnswerMissing: return "AnswerMissing";
    case ErrorCode::kTooFewRuns: return "TooFewRuns";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace tableforge
