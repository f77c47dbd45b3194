#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vpkit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitDivergence = 3;

/// Runs the `vpkit` command line; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vpkit
