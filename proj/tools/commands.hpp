#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lmvsc::cli {

/// Parses `args` (without the program name) and runs the chosen subcommand.
/// Returns the process exit code; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace lmvsc::cli
