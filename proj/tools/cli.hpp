#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace orient::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericalError = 3 };

// Runs one command line (without the program name). Diagnostics go to
// `err`, progress to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace orient::cli
