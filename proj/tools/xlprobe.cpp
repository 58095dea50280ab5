#include <iostream>
#include <string>
#include <vector>

#include "xlprobe/cli/app.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return xlprobe::cli::run(args, std::cout, std::cerr);
}
