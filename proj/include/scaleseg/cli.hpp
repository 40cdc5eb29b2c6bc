#pragma once

#include <string>
#include <vector>

namespace scaleseg {

// Runs one CLI invocation (no program name in `args`). Exit codes:
// 0 success, 1 validation failure, 2 I/O failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace scaleseg
