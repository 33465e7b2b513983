#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fsegan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Returns 0 on success, 1 on usage errors, 2 on failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

std::string version_line();

}  // namespace fsegan::cli
