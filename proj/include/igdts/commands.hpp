#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace igdts {

// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;   // tracking lost under the halt policy, internal errors
inline constexpr int kExitBadInput = 2;  // missing or malformed input, bad flags

// Entry point behind the igdts executable. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace igdts
