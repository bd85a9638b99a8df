#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fds::cli {

enum ExitCode : int { ok = 0, check_failed = 1, usage = 2, io = 3 };

/// Runs one command line (without the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fds::cli
