#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qquant::cli {

/// Process exit codes; a stable contract for scripting.
enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 2,         // bad flags, config or input files
  kDataPrecondition = 3,   // the data cannot support the request
};

/// Runs one command line (without the program name). Output files are
/// written atomically; human-readable progress goes to `out`, diagnostics
/// to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qquant::cli
