#pragma once

#include <iosfwd>

namespace slif::cli {

enum ExitCode {
    exit_ok = 0,
    exit_failure = 1,      // I/O or internal error
    exit_config = 2,       // invalid command line or config document
    exit_infeasible = 3,   // calibration target cannot be met
    exit_partial = 4,      // grid sweep finished with failed cells
};

// Entry point of the `slif` tool; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace slif::cli
