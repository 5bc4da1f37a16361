#pragma once

#include <string>
#include <vector>

namespace spatialcpl::cli {

inline constexpr const char* kToolVersion = "0.3.0";

// Runs the command line; returns the process exit code
// (0 ok, 2 argument error, 3 data/format error, 4 degeneracy/connectivity).
int run(const std::vector<std::string>& args);

// Parses "a..b", "a..b:step" or "a,b,c" into a list of counts.
std::vector<std::size_t> parse_range(const std::string& text);

}  // namespace spatialcpl::cli
