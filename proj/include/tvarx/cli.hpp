#pragma once

#include <iosfwd>

namespace tvarx::cli {

enum ExitCode : int {
  kOk = 0,
  kIoError = 2,
  kValidation = 3,
  kDomainRefusal = 4,
  kNumericalFailure = 5,
};

/// Runs one command line (argv[0] is the program name). Diagnostics go to
/// `err`, summaries and reports to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tvarx::cli
