#include "reid/errors.hpp"

namespace reid {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedFilename: return "MalformedFilename";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::MissingFeature: return "MissingFeature";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DuplicateFilename: return "DuplicateFilename";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::UnknownCamera: return "UnknownCamera";
    case ErrorCode::InvalidTopology: return "InvalidTopology";
    case ErrorCode::ZeroNormVector: return "ZeroNormVector";
    case ErrorCode::NoRelevantItems: return "NoRelevantItems";
    case ErrorCode::AllQueriesSkipped: return "AllQueriesSkipped";
    case ErrorCode::NoMatchedPairs: return "NoMatchedPairs";
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::DegenerateSamples: return "DegenerateSamples";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::UnsupportedFamily: return "UnsupportedFamily";
    case ErrorCode::MissingFps: return "MissingFps";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace reid
