#pragma once

#include <string>
#include <vector>

namespace discfdr {

// Runs the command-line tool on `args` (program name excluded).
// Returns the process exit code: 0 on success, 2 for input errors
// (unreadable or malformed data), 3 for configuration errors (bad flags,
// bad config file, invalid scenario).
int run_cli(const std::vector<std::string>& args);

}  // namespace discfdr
