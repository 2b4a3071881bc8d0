#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reid {

enum class ErrorCode {
  MalformedFilename,
  MalformedInput,
  MissingFeature,
  DimensionMismatch,
  DuplicateFilename,
  NonFiniteFeature,
  UnknownCamera,
  InvalidTopology,
  ZeroNormVector,
  NoRelevantItems,
  AllQueriesSkipped,
  NoMatchedPairs,
  InvalidParameters,
  InsufficientSamples,
  DegenerateSamples,
  NonConvergence,
  UnsupportedFamily,
  MissingFps,
  InvalidConfig,
  IoError,
};

std::string_view error_code_name(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above so the
// CLI can report it as machine-readable JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace reid
