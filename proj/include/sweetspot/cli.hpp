#pragma once

#include <string>
#include <vector>

namespace sweetspot {

// Full command-line entry point (arguments without the program name).
// Returns the process exit code: 0 on success (null findings included),
// 1 on bad input or usage, 2 on internal errors.
int run_cli(std::vector<std::string> args);

}  // namespace sweetspot
