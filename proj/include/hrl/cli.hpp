#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hrl::harness {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kExitNumeric = 5;
inline constexpr int kExitContract = 6;
inline constexpr int kExitInternal = 70;

// Entry point of the `brhpo` tool. `args` excludes the program name. Results
// go to `out`; diagnostics are one JSON object per line on `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hrl::harness
