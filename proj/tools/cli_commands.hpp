#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "tma/attack.hpp"
#include "tma/experiment_config.hpp"

namespace tma::cli {

enum class ExitCode : int {
  ok = 0,
  failure = 1,  // I/O or unexpected error
  config_error = 2,
  search_exhausted = 3,
  defense_failed = 4,
};

struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<SearchMode> mode;
  std::optional<std::uint64_t> symbols;
};

/// transmit | attack | defend | ber | sweep. Output files go to the config's
/// out_dir; nothing is written when the config fails to parse.
ExitCode run_subcommand(const std::string& name, const std::string& config_path, const Overrides& overrides,
                        std::ostream& out, std::ostream& err);

/// Echoes the config and writes each (file name, contents) pair into dir.
void write_outputs(const std::string& dir, const ExperimentConfig& config,
                   const std::vector<std::pair<std::string, std::string>>& files);

}  // namespace tma::cli
