#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace anomspec::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kDataError = 2,
  kIntractable = 3,
};

/// Runs one command line (args excludes the program name). Results go to out,
/// diagnostics and the run manifest to err unless --manifest names a file.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace anomspec::cli
