#pragma once

#include <string>
#include <vector>

namespace lgan::cli {

// Exit codes: 0 success, 1 user error, 2 internal error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUser = 1;
inline constexpr int kExitInternal = 2;

int run(int argc, char** argv);
// Convenience for tests: args exclude the program name.
int run(const std::vector<std::string>& args);

}  // namespace lgan::cli
