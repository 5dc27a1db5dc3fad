#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sdx::cli {

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kDomainError = 2,
  kNumericError = 3,
  kPartial = 4,
  kUsage = 64,
};

/// Runs the sdx command line. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sdx::cli
