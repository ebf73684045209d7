#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eegcap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one command line (without the program name). Normal output goes to
/// `out`, diagnostics and usage text to `err`. Returns the process exit code:
/// 0 success, 1 usage or configuration error, 2 runtime failure.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eegcap::cli
