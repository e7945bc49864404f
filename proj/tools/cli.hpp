#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qasdyn::cli {

enum ExitCode : int {
  kOk = 0,
  kNegative = 1,  ///< NotQAS, Inconclusive, FAIL, or a failed check in verify-all
  kInputError = 2,
  kResourceLimit = 3,
  kInternal = 4,
};

/// Runs one command line (without the program name). Results go to `out`,
/// diagnostics to `err`; with --json, errors are also reported as JSON on `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qasdyn::cli
