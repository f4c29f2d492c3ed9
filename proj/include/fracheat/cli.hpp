#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fracheat {

enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_usage = 2, exit_numerical = 3 };

/// Runs one subcommand (mlf, fode, solve, sweep, verify). `args` excludes
/// the program name. Primary output goes to `out`, diagnostics to `err`.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int parse_and_dispatch(const std::vector<std::string>& args);

}  // namespace fracheat
