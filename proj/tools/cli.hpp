#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace unml::cli {

enum ExitCode : int {
  kOk = 0,
  kIoError = 2,
  kInvalidConfig = 3,
  kNumericalFailure = 4,
  kBoundViolated = 5,
};

/// Entry point of the `unml` tool; args[0] is the program name. Reports go
/// to `out` (or --output), diagnostics to `err`. Nothing is written to the
/// report destination unless the command succeeds.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace unml::cli
