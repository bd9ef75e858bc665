#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cqc::cli {

enum ExitCode : int {
    ok = 0,
    usage_error = 1,
    data_error = 2,
    numerical_failure = 3,
};

// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "CQC_OUTPUT_DIR";

// Runs the command line (args excludes the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cqc::cli
