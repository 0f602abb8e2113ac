#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bvmc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Entry point of the `bvmc` tool. Primary output goes to `out` unless a
// subcommand writes to a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace bvmc
