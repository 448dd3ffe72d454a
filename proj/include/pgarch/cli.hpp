#pragma once

#include <string>
#include <vector>

namespace pgarch::cli {

enum ExitCode : int { ok = 0, usage = 1, data_error = 2, numerical_error = 3 };

/// Runs the command-line driver; args excludes the program name.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace pgarch::cli
