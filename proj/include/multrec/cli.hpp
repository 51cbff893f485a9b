#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace multrec::cli {

// Runs the command-line interface; returns the process exit status.
// Diagnostics go to err as single-line JSON records.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace multrec::cli
