#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <vector>

#include "metacure/agents/replay.hpp"
#include "metacure/agents/sac.hpp"
#include "metacure/curiosity/predictors.hpp"
#include "metacure/envkit/tabular.hpp"
#include "metacure/envkit/task.hpp"
#include "metacure/metaloop/adaptation.hpp"
#include "metacure/metaloop/config.hpp"
#include "metacure/metaloop/nets.hpp"
#include "metacure/numkit/rng.hpp"

namespace metacure::metaloop {

// Iteration means of every training loss, plus the evaluation columns when an
// evaluation pass ran this iteration. Quantities a variant never computes
// stay at zero.
struct IterationStats {
  std::size_t iteration = 0;  // 1-based in the log
  std::size_t env_steps = 0;  // cumulative collection steps
  double pred_meta = 0.0;
  double pred_task = 0.0;
  double kl = 0.0;
  double explorer_critic = 0.0;
  double explorer_policy = 0.0;
  double exploiter_critic = 0.0;
  double exploiter_policy = 0.0;
  double mean_intrinsic = 0.0;
  double mean_exploration_reward = 0.0;
  bool evaluated = false;
  double eval_return = 0.0;
  double eval_success = 0.0;
};

struct EvalRow {
  std::size_t task = 0;
  std::size_t trial = 0;
  double final_return = 0.0;
  bool success = false;
  std::vector<double> episode_returns;
};

struct EvalReport {
  std::vector<EvalRow> rows;  // task-major, then trial
  double mean_final_return = 0.0;
  double success_rate = 0.0;  // fraction of rows whose final episode succeeded
};

// Square grid over [-1.5, 1.5]^2 of the prediction gap and the
// belief-predictor error at the empty-context belief, averaged over freshly
// sampled tasks. Row-major with y varying first: cell (iy, ix) sits at
// index iy * n + ix, centered on (xs[ix], ys[iy]).
struct HeatmapGrid {
  std::size_t n = 0;
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> gap;       // mean prediction gap per cell
  std::vector<double> meta_err;  // mean belief-conditioned squared error per cell
};

class Trainer {
 public:
  Trainer(TrainConfig cfg, std::uint64_t seed);

  // Collection budget divided by the steps one iteration collects, at least 1.
  std::size_t planned_iterations() const;

  // One full iteration: collect a trial on every training task, then run the
  // per-task gradient steps, then evaluate if the schedule says so. Throws
  // NumericError if any iteration mean comes out non-finite.
  IterationStats run_iteration();

  using CheckpointHook = std::function<void(const Trainer&, std::size_t iteration)>;

  // Runs to the planned iteration count, streaming metric rows. The hook
  // fires after every evaluated iteration.
  void run(std::ostream& metrics, const CheckpointHook& hook = {});

  // Held-out adaptation with deterministic exploitation actions. The second
  // form reseeds only the evaluation streams; the task set stays the run's.
  EvalReport evaluate(std::size_t trials_per_task) const;
  EvalReport evaluate(std::size_t trials_per_task, std::uint64_t eval_seed) const;

  HeatmapGrid intrinsic_heatmap(std::size_t grid_n, std::size_t n_probe_tasks) const;

  static void write_metrics_header(std::ostream& os);
  static void write_metrics_row(std::ostream& os, const IterationStats& st);

  const TrainConfig& config() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t env_steps() const { return env_steps_; }
  std::size_t iteration() const { return iteration_; }
  std::size_t intrinsic_calls() const;
  Nets& nets() { return *nets_; }
  const Nets& nets() const { return *nets_; }
  const envkit::Env& train_env(std::size_t m) const { return *train_envs_.at(m); }
  const envkit::Env& test_env(std::size_t i) const { return *test_envs_.at(i); }

  // Replay stores by the policy that trains from them; one shared object
  // unless the variant splits them. Encoder stores likewise.
  const agents::ReplayBuffer& explorer_buffer() const { return *buffer_a_; }
  const agents::ReplayBuffer& exploiter_buffer() const {
    return buffer_b_ ? *buffer_b_ : *buffer_a_;
  }
  const numkit::ParamStore* explorer_encoder_store() const {
    return &nets_->belief_encoder();
  }
  const numkit::ParamStore* exploiter_encoder_store() const {
    return &nets_->latent_encoder();
  }

 private:
  struct Accum {
    double sum = 0.0;
    std::size_t n = 0;
    void add(double v) {
      sum += v;
      ++n;
    }
    double mean() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
  };
  struct TrainAccums;

  void build_envs();
  void collect(std::size_t k);
  void route(agents::Rollout r);
  IterationStats train(std::size_t k);
  void train_one(std::size_t m, numkit::Rng& rng, TrainAccums& acc);

  TrainConfig cfg_;
  std::uint64_t seed_ = 0;
  std::shared_ptr<const envkit::TabularFamily> tabular_family_;
  std::vector<std::unique_ptr<envkit::Env>> train_envs_;
  std::vector<std::unique_ptr<envkit::Env>> test_envs_;
  std::unique_ptr<Nets> nets_;
  std::unique_ptr<curiosity::IntrinsicRewarder> rewarder_;
  std::unique_ptr<agents::ReplayBuffer> buffer_a_;
  std::unique_ptr<agents::ReplayBuffer> buffer_b_;  // only when buffers split
  agents::SacHyper hyper_;
  std::size_t env_steps_ = 0;
  std::size_t iteration_ = 0;
};

}  // namespace metacure::metaloop
