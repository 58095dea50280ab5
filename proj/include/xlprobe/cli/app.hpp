#pragma once

#include <exception>
#include <ostream>
#include <string>
#include <vector>

namespace xlprobe::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_other = 1,
    exit_config = 2,
    exit_backend = 3,
    exit_invariant = 4,
};

/// Exit code for an exception escaping a subcommand.
int exit_code_for(const std::exception& e);

/// Runs the `xlprobe` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xlprobe::cli
