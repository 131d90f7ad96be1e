#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fdia::cli {

enum ExitCode : int { kSuccess = 0, kInternalError = 1, kInputError = 2, kInfeasible = 3 };

/// Runs one subcommand. `args` excludes the program name, e.g.
/// {"gen-data", "--case", "grid.case", "--out", "run"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fdia::cli
