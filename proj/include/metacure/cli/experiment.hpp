#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "metacure/metaloop/config.hpp"

namespace metacure::cli {

// Everything a run needs beyond the training loop's own knobs: seeding,
// output location, checkpoint cadence, and figure resolution.
struct ExperimentConfig {
  metaloop::TrainConfig train;
  std::uint64_t seed = 1;
  std::string out_dir;  // may stay empty when the command line supplies one
  // Iterations between checkpoint saves; 0 follows the evaluation interval.
  // The 20%-of-budget and final checkpoints are always written.
  std::size_t checkpoint_interval = 0;
  std::size_t heatmap_grid_n = 40;
  std::size_t heatmap_probe_tasks = 16;

  void validate() const;  // throws ConfigError naming the offending key
};

// Flat `key = value` text. Blank lines and lines starting with '#' or ';'
// are skipped; `[section]` headers group keys visually but carry no meaning.
// Unknown or duplicate keys are hard errors. The schema is documented in
// docs/config-schema.md.
ExperimentConfig parse_experiment_config(const std::string& text);

struct ConfigFile {
  ExperimentConfig config;
  std::string raw_text;  // verbatim bytes, snapshotted into the run directory
};

// Throws ConfigError naming the path when the file cannot be read.
ConfigFile load_experiment_config(const std::filesystem::path& path);

// Environment family tags used in config files: "point-robot-sparse",
// "point-robot-sparse-noise", "tabular".
envkit::EnvFamily parse_env_family(const std::string& tag);
std::string env_family_tag(envkit::EnvFamily family);

}  // namespace metacure::cli
