#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ace::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kBadInput = 2, kNumeric = 3 };

// Runs one `ace` subcommand. `args` excludes the program name. Diagnostics go
// to `err` as a single line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ace::cli
