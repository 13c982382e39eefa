#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace etale::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kRefused = 2,
};

// Runs one invocation; args excludes the program name. Input "-" reads in.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err, std::istream &in);

}  // namespace etale::cli
