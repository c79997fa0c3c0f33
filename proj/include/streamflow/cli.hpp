#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

namespace streamflow {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitData = 3,
    kExitDivergence = 4,
};

int exit_code_for(const std::exception& e);

/// Entry point of the `streamflow` tool; args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace streamflow
