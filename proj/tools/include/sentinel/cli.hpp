#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sentinel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitConfig = 2;

/// Runs the `sentinel` command line; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sentinel::cli
