#pragma once

#include <string>
#include <vector>

namespace tdamal::cli {

inline constexpr const char* version = "0.1.0";
inline constexpr const char* out_dir_env = "TDAMAL_OUT_DIR";

/// Runs one subcommand. Returns the process exit code: 0 on success, 2 for
/// usage errors, 1 for failures; diagnostics go to stderr.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace tdamal::cli
