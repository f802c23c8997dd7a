#pragma once

#include <iosfwd>

namespace priorimpact::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitSandwichFail = 2;
inline constexpr int kExitOracleError = 3;

/// Entry point of the `priorimpact` tool with injectable streams.
/// Subcommands: bounds, verify, sweep. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace priorimpact::cli
