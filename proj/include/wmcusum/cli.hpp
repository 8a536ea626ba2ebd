#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wmcusum {

/// Exit statuses of the command-line front end.
enum ExitStatus : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

/// Parses argv (argv[0] is the program name) and runs one of the subcommands
/// gains, kld, simulate, add, sweep, check. Results go to --out when given, else to `out`;
/// diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace wmcusum
