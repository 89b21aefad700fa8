#include <iostream>
#include <string>
#include <vector>

#include "nscreen/cli/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return nscreen::cli::run(args, std::cout, std::cerr);
}
