#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hus {

enum ExitCode : int { exit_pass = 0, exit_verification_failed = 1, exit_usage = 2, exit_numerical = 3 };

/// Runs the command-line front end. `args` excludes the program name.
/// Artifacts go to `out` unless --output names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hus
