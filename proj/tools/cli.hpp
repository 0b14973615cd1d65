#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dialect::cli {

// Runs one command line (args excludes the program name). Returns the exit
// code: 0 on success, 1 for usage and validation errors, 2 for runtime errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dialect::cli
