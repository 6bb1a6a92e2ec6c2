#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace evalign::cli {

enum ExitCode : int { ok = 0, io_failure = 1, invalid_input = 2 };

/// Runs the command line `args` (without the program name). Normal output goes
/// to `out`, diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace evalign::cli
