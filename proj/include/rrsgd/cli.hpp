#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rrsgd::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidation = 2,
  kDivergence = 3,
  kIo = 4,
};

// Entry point behind tools/rrsgd. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rrsgd::cli
