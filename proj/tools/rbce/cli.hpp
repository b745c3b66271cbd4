#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rbce::cli {

// Process exit codes. Every failure also prints one JSON error line to `err`.
enum ExitCode : int {
    kOk = 0,
    kUnexpected = 1,
    kBadConfig = 2,
    kBadData = 3,
    kNumericalFailure = 4,
};

/// Runs one command line. `args` excludes the program name.
int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rbce::cli
