#pragma once

#include <iosfwd>

namespace dde::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point shared by the executable and the tests. Subcommands: solve,
/// map, verify-table, sweep, smooth.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dde::cli
