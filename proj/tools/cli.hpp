#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace biqme::cli {

// Exit codes, one per error class.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kIo = 3,
  kDimension = 4,
  kConfig = 5,
  kParse = 6,
  kVersion = 7,
  kConvergence = 8,
  kInvalidArgument = 9,
  kDataOverlap = 10,
};

int exit_code_for(const char* kind);

// Runs one command line (args excludes the program name). Machine output
// goes to `out`; the one-line error `error: <kind>: <message>` to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace biqme::cli
