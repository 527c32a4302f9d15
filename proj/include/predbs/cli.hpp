#pragma once

#include <iosfwd>

namespace predbs::cli {

/// Exit codes: 0 success, 1 domain error, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line tool. Summaries go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace predbs::cli
