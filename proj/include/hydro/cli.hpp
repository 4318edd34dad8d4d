#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hydro::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolver = 3;

/// Subcommands: solve, simulate, sweep, generate-scenarios. Errors are
/// written to `err` as a one-line JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string version_string();

}  // namespace hydro::cli
