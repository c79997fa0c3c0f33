#include <iostream>
#include <string>
#include <vector>

#include "streamflow/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return streamflow::run_cli(args, std::cout, std::cerr);
}
