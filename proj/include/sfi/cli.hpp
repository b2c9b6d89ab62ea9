#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sfi {

/// Runs one `sfi` subcommand; returns the process exit code. Errors are
/// reported on `err` and never escape as exceptions.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sfi
