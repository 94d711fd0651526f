#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qolat_cli/config.hpp"

namespace qolat::cli {

enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitConfig = 2, kExitNumeric = 3, kExitIo = 4 };

const std::vector<std::string>& subcommands();
// Config sections a subcommand reads; values in any other section are rejected.
const std::vector<std::string>& sections_for(const std::string& subcommand);
bool is_stochastic(const std::string& subcommand);

struct RunConfig {
  std::string subcommand;
  Config values;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

// Resolves run-level settings and validates every parameter the subcommand
// will use. Throws ConfigError or qolat::InvalidArgument.
RunConfig make_run_config(const std::string& subcommand, Config values);

// Runs the subcommand and writes its outputs. Throws on failure, leaving no
// partial files behind.
void execute(const RunConfig& config, std::ostream& log);

// Maps an in-flight exception to an exit code and prints it.
int report_failure(std::ostream& err);

// Full command-line entry point.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qolat::cli
