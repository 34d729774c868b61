#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace facegraph::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs the command line in-process. Returns the exit status; normal output
/// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace facegraph::cli
