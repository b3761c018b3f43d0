#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dflow {

inline constexpr const char* kVersion = "1.0.0";

/// Runs one command line (without the program name). Returns the exit
/// status: 0 success, 1 computation error, 2 input error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dflow
