#include <iostream>
#include <string>
#include <vector>

#include "wigcn/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return wigcn::run_cli(args, std::cout, std::cerr);
}
