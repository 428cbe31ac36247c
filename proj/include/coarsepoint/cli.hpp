#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coarsepoint::cli {

inline constexpr const char* kVersion = "0.1.0";
/// Environment variable naming a default JSON config for refinement keys.
inline constexpr const char* kConfigEnv = "COARSEPOINT_CONFIG";

/// Runs one command line. Returns 0 on success, 1 on domain errors and 2 on
/// usage errors. `args[0]` is the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv);

}  // namespace coarsepoint::cli
