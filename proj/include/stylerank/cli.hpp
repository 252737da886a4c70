#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stylerank::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitPartial = 2;

/// Runs one command line (without the program name). Results go to `out`
/// unless --out names a destination; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace stylerank::cli
