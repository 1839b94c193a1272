#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nucseg {

// Entry point of the `nucseg` tool. Returns the process exit code:
// 0 success, 1 runtime failure (bad config, missing files, invariant
// violations), 2 command-line usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nucseg
