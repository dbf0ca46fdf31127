#pragma once

#include <string>
#include <vector>

namespace talon::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kIo = 2 };

/// Entry point of the `talon` executable. argv[0] is the program name.
/// Diagnostics go to standard error; results go to files or standard output ("-").
int run(int argc, const char* const* argv);

int run(const std::vector<std::string>& args);

/// Parses "lo:step:hi" (inclusive) or a comma-separated list.
std::vector<double> parse_tiou_grid(const std::string& spec);

}  // namespace talon::cli
