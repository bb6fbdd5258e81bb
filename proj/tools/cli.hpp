#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace supermarket::cli {

// Runs one command line (args exclude the program name). JSON summaries go
// to `out`, errors to `err` as a single JSON line. Returns the exit code:
// 0 on success, 2 on validation failures, 1 on numerical failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace supermarket::cli
