#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace metacure::cli {

struct TrainArgs {
  std::string config_path;
  std::string out_dir;                 // overrides the config's out_dir
  std::optional<std::uint64_t> seed;   // overrides the config's seed
  std::optional<std::size_t> workers;  // overrides the config's workers
  bool overwrite = false;
  // Set by the ablate command; must already be a valid variant tag.
  std::string variant_override;
};

struct EvalArgs {
  std::string run_dir;
  std::string checkpoint = "final";
  std::optional<std::uint64_t> seed;  // reseeds evaluation stochasticity only
};

struct HeatmapArgs {
  std::string run_dir;
  std::string checkpoint = "final";
};

struct OracleArgs {
  std::size_t instances = 100;
  std::uint64_t seed = 1;
  bool corrupt_const = false;  // negative-control hook: breaks the constant term
};

struct GradcheckArgs {
  std::uint64_t seed = 1;
  std::size_t draws = 10;  // random draws per loss family
  bool flip_sign = false;  // negative-control hook: negates analytic gradients
};

// Exit codes across all commands: 0 success, 1 check failure, 2 usage or
// config error, 3 numerical runtime failure.
int cmd_train(const TrainArgs& args);
int cmd_eval(const EvalArgs& args);
int cmd_heatmap(const HeatmapArgs& args);
int cmd_oracle(const OracleArgs& args);
int cmd_gradcheck(const GradcheckArgs& args);

// Full argument parsing and dispatch for the `metacure` binary.
int run_cli(int argc, char** argv);

}  // namespace metacure::cli
