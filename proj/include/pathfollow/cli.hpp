#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pathfollow {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Runs the `pathfollow` command line. `args` includes the program name.
/// Summaries go to `out`, diagnostics to `err`; CSV files go to --out, with
/// "-" meaning `out`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pathfollow
