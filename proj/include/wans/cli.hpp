#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wans::cli {

// Exit codes of the `wans` tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitCorruptData = 3;

// Runs one subcommand (args exclude the program name). Reports go to `out`,
// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wans::cli
