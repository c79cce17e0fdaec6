#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tableforge::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitFindings = 1,
  kExitInput = 2,
  kExitInfeasible = 3,
  kExitService = 4,
};

// Entry point behind the `tableforge` binary; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tableforge::app
