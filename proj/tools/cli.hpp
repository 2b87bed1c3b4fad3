#ifndef VAPAL_TOOLS_CLI_HPP
#define VAPAL_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace vapal::cli {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr const char* kOutDirEnv = "VAPAL_OUT_DIR";

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line `args` (without the program name). Returns the
/// process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vapal::cli

#endif  // VAPAL_TOOLS_CLI_HPP
