#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ecoap::cli {

// Exit codes are a stable contract for scripts.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kIoError = 2;
inline constexpr int kConfigError = 3;
inline constexpr int kParseError = 4;
inline constexpr int kConsistencyError = 5;

/// Runs one invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ecoap::cli
