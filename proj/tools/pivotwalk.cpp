#include <iostream>

#include "pivotwalk/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return pw::run_cli(args, std::cout, std::cerr);
}
