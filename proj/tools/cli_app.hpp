#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace roughflow::cli {

/// Exit codes of the command line tool.
enum ExitCode : int { kOk = 0, kInternal = 1, kConfigError = 2, kNumericError = 3, kIoError = 4 };

/// Entry point behind `main`; args[0] is the program name. Results and
/// reports go to `out`, error records (one JSON object) and warnings to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace roughflow::cli
