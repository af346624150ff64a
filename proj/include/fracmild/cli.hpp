#ifndef FRACMILD_CLI_HPP
#define FRACMILD_CLI_HPP

#include <string>
#include <vector>

namespace fracmild::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit statuses of every subcommand:
///   0  success
///   2  config/validation error (no artifacts written)
///   3  no contraction detected (horizon exceeded)
///   4  numerical check failed
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNoContraction = 3;
inline constexpr int kExitCheckFailed = 4;

struct Options {
  std::string subcommand;
  std::string config_path;
  std::string out_dir = ".";
  unsigned seed = 12345;
  int threads = 1;
};

/// Runs one subcommand end to end (config load, validation, computation,
/// artifact writes). Returns the exit status; never throws.
int run(const Options& opts);

std::vector<std::string> known_subcommands();

} // namespace fracmild::cli

#endif
