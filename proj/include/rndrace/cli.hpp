#pragma once

#include <ostream>

namespace rndrace {

/// Exit statuses of the command-line front end.
enum ExitStatus : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitAssumption = 3,
  kExitNumerical = 4,
};

/// Runs `rndrace <command> [options]`. Results go to `out` (or the --out
/// file); diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rndrace
