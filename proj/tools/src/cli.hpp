#pragma once

#include <string>
#include <vector>

namespace nnreach::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kConfig = 2, kNumerical = 3, kUnsafe = 4 };

/// Parses the command line, runs one subcommand and maps failures to exit
/// codes. Diagnostics go to stderr.
int run(int argc, char** argv);
/// Same, with args[0] as the program name.
int run(const std::vector<std::string>& args);

}  // namespace nnreach::cli
