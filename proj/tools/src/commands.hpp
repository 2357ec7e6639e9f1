// commands.hpp - the five subcommands. Each reads a scenario, writes its files
// into the output directory and returns the process exit code.

#pragma once

#include <optional>
#include <string>

namespace dualprobe::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kRegime = 3 };

struct CommandOptions {
  std::optional<std::string> config;
  std::string out{"."};
  unsigned parallel{1};
  std::optional<std::string> engine;  // overrides the config file
  std::optional<std::string> input;   // extract: measured-style CSV (t, value)
};

int cmd_simulate(const CommandOptions& opts);
int cmd_extract(const CommandOptions& opts);
int cmd_threshold(const CommandOptions& opts);
int cmd_scan(const CommandOptions& opts);
int cmd_markov(const CommandOptions& opts);

/// Runs one of the above by name and maps exceptions to exit codes: bad
/// input gives 2, a scenario outside the validity of the requested method
/// gives 3, anything else 1. The message goes to stderr.
int run_command(const std::string& name, const CommandOptions& opts);

}  // namespace dualprobe::cli
