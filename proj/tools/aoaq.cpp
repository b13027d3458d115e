#include <iostream>
#include <string>
#include <vector>

#include "aoaq/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return aoaq::cli::run(args, std::cout, std::cerr, aoaq::cli::environment_from_process());
}
