#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reid {

inline constexpr const char* kToolVersion = "0.1.0";

/// Entry point behind the `reid` binary. Exit codes: 0 success, 2 input or
/// configuration error, 3 numerical non-convergence. Errors are written to
/// `err` as one JSON object.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace reid
