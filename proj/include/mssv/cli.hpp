#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mssv::cli {

/// Exit codes: 0 success, 1 runtime error, 2 usage error.
inline constexpr int exit_ok = 0;
inline constexpr int exit_runtime = 1;
inline constexpr int exit_usage = 2;

/// Runs one subcommand. `args` excludes the program name. Output files are
/// written only after the computation succeeds; a one-line JSON summary goes
/// to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mssv::cli
