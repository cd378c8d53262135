#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace roughrec::cli {

/// Exit codes of the roughrec tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitNumerical = 1,
  kExitDomain = 2,
  kExitUsage = 64,
};

/// Runs the tool on `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace roughrec::cli
