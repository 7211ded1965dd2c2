#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace corrlog::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kDataError = 2,
  kNumericalError = 3,
};

/// Runs one command. `args[0]` is the program name. Summaries go to `out`,
/// timings and warnings to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace corrlog::cli
