#include <iostream>
#include <string>
#include <vector>

#include "vtp/cli/cli.hpp"
#include "vtp/core/parallel.hpp"

int main(int argc, char** argv) {
    vtp::configure_threads_from_env();
    std::vector<std::string> args(argv + 1, argv + argc);
    return vtp::cli::run_cli(args, std::cout, std::cerr);
}
