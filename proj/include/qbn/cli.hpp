#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qbn {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // criteria failed, violations, illegal queries
inline constexpr int kExitUsage = 2;    // bad flags, unreadable or malformed input

// Runs the command line `args` (without the program name) and returns the
// exit code. Subcommands: validate, eval, learn, sample, bounds, repro.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qbn
