#pragma once

#include <exception>
#include <ostream>
#include <string>
#include <vector>

namespace reuse::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kParse = 2,
  kGuard = 3,
  kInvariant = 4,
};

// Maps a failure to its exit code and writes the diagnostic (and any trace
// dump) to `err`.
int report_failure(std::exception_ptr failure, std::ostream& err);

// Entry point shared by the binary and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace reuse::cli
