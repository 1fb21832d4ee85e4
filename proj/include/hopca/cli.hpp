#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hopca {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitIo = 2, kExitNumerical = 3 };

/// Runs the command line interface on argv-style arguments (args[0] is the
/// program name). Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hopca
