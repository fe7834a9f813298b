#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace flowsift::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kSchemaError = 3,
  kDivergence = 4,
};

/// Runs one command line (args excludes the program name). Human-readable
/// diagnostics go to `err`; `out` receives streamed output (score to stdout).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flowsift::cli
