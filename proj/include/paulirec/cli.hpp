#pragma once

#include <string>
#include <vector>

namespace paulirec::cli {

/// Runs one CLI invocation (args exclude the program name). Exit codes:
/// 0 success, 1 config error, 2 contract violation, 3 I/O error.
int run(const std::vector<std::string>& args);

}  // namespace paulirec::cli
