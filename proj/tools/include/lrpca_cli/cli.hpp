#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lrpca::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Runs `lrpca <args...>` (args excludes the program name) and returns the
// exit code. Diagnostics go to `err`, progress lines to `out`.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace lrpca::cli
