#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "metacure/envkit/task.hpp"

namespace metacure::metaloop {

// Pipeline wiring for a run. Every variant shares the same nets, losses, and
// schedule; each tag disables or duplicates exactly one component.
enum class Variant {
  Full,
  NoIntrinsic,        // exploration reward drops the prediction gap
  LambdaZero,         // exploration reward drops the external term
  SeparateBuffers,    // each policy trains from its own replay store
  SeparateEncoders,   // exploration-side beliefs come from a second encoder
  NoExploiter,        // the exploration policy collects and is judged on every episode
  PosteriorSampling,  // no exploration policy; a fresh latent draw every episode
};

// Throws ConfigError on an unknown tag.
Variant parse_variant(const std::string& tag);
std::string variant_tag(Variant v);

struct TrainConfig {
  envkit::EnvFamily family = envkit::EnvFamily::PointRobotSparse;
  // Which tabular family to build when family == TabularBandit.
  std::string tabular_family = "two-arm-deterministic";
  Variant variant = Variant::Full;

  std::size_t n_train_tasks = 20;
  std::size_t n_test_tasks = 20;
  std::size_t episodes_per_trial = 4;  // first E-1 gather context, the last exploits
  std::size_t horizon = 32;            // episode length; tabular families keep their own

  std::size_t env_step_budget = 300000;  // collection steps; evaluation is not charged
  std::size_t steps_per_iteration = 100;  // gradient steps per task per iteration
  std::size_t eval_interval = 10;         // iterations between held-out evals; 0 disables
  std::size_t eval_trials = 1;            // adaptation runs per test task at eval time

  std::size_t z_dim = 5;
  std::vector<std::size_t> encoder_hidden = {64, 64};
  std::vector<std::size_t> predictor_hidden = {64, 64};
  std::vector<std::size_t> policy_hidden = {128, 128};
  std::vector<std::size_t> q_hidden = {128, 128};

  double lr = 3e-4;
  std::size_t batch_size = 96;
  std::size_t context_batch_size = 64;   // transitions behind each latent draw
  std::size_t reencode_batch_size = 24;  // batch for losses that re-encode prefixes
  double gamma = 0.99;
  double tau = 0.005;
  double alpha = 0.1;
  double beta_kl = 1.0;
  double lambda = 0.3;  // external-reward weight in the exploration reward
  std::size_t replay_capacity = 100000;  // transitions per task per stream

  std::size_t workers = 1;

  // Throws ConfigError naming the offending field.
  void validate() const;

  // The prediction-gap weight actually applied, after the variant's override.
  double effective_lambda() const;
  bool uses_intrinsic() const;   // trains predictors and relabels with the gap
  bool has_explorer() const;     // a separate exploration policy exists
  bool has_exploiter() const;    // a separate exploitation policy exists
  bool reencodes_context() const;  // predictor step re-encodes prefixes
};

}  // namespace metacure::metaloop
