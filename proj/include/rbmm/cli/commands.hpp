#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "rbmm/cli/config.hpp"

namespace rbmm::cli {

enum ExitCode : int { kOk = 0, kProbeFailed = 1, kConfigError = 2, kNumericalError = 3 };

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

// Each command loads the config, applies overrides, validates everything
// before touching the filesystem, and maps failures onto ExitCode.
int run_command(const std::string& config_path, const Overrides& o, std::ostream& log);
int probe_command(const std::string& config_path, const Overrides& o, std::ostream& log);
int gen_data_command(const std::string& config_path, const Overrides& o, std::ostream& log);

// Same, on an already parsed config.
int run_experiment(const RunConfig& config, std::ostream& log);
int run_probes(const RunConfig& config, std::ostream& log);
int generate_data(const RunConfig& config, std::ostream& log);

// Entry point behind the `rbmm` executable.
int main_entry(int argc, char** argv);

}  // namespace rbmm::cli
