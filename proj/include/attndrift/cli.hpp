#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace attndrift::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

inline constexpr const char* kVersion = "0.1.0";

// Runs the command line `args` (without the program name). Results go to
// files under --out; progress and errors to `out` and `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace attndrift::cli
