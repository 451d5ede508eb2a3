#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace circlekms::cli {

/// Runs one command line (args excludes the program name). Returns the exit
/// status: 0 ok, 2 validation error, 3 resource guard.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace circlekms::cli
