#pragma once

// Command-line front end: simulate | phase1 | phase2 | evaluate | plotdata.

#include <string>
#include <vector>

namespace frtm {

/// Exit codes: 0 success, 2 validation error, 3 numerical failure.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace frtm
