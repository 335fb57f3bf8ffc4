#pragma once

#include <memory>
#include <vector>

#include "metacure/envkit/task.hpp"

namespace metacure::envkit {

struct TabularOutcome {
  double reward = 0.0;
  std::size_t next_state = 0;
  double prob = 0.0;
};

// One task of a finite family: a joint distribution over (reward, next
// state) per (state, action), plus the task's initial-state distribution.
struct TabularTaskModel {
  // dists[s][a] lists outcomes whose probabilities sum to 1.
  std::vector<std::vector<std::vector<TabularOutcome>>> dists;
  std::vector<double> init_dist;
};

// A small task family over shared states/actions with a known prior. Every
// distribution is exact, so trajectory sets can be enumerated in full.
class TabularFamily {
 public:
  TabularFamily(std::size_t n_states, std::size_t n_actions, std::size_t horizon,
                std::vector<double> prior, std::vector<TabularTaskModel> tasks);

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  std::size_t n_tasks() const { return tasks_.size(); }
  std::size_t horizon() const { return horizon_; }
  const std::vector<double>& prior() const { return prior_; }

  const std::vector<TabularOutcome>& exact_model(std::size_t task, std::size_t s,
                                                 std::size_t a) const;
  // p(r, s2 | task, s, a); reward values are matched exactly, so queries must
  // use values from the family's finite reward set.
  double outcome_prob(std::size_t task, std::size_t s, std::size_t a, double r,
                      std::size_t s2) const;
  // Deduplicated (reward, next_state) support across all tasks.
  std::vector<std::pair<double, std::size_t>> union_support(std::size_t s,
                                                            std::size_t a) const;
  double init_prob(std::size_t task, std::size_t s) const;
  double marginal_init_prob(std::size_t s) const;

  numkit::Array kappa_for(std::size_t task) const;  // one-hot

 private:
  void validate() const;
  std::size_t n_states_;
  std::size_t n_actions_;
  std::size_t horizon_;
  std::vector<double> prior_;
  std::vector<TabularTaskModel> tasks_;
};

// Two tasks, two arms. Arm 0 pays 1 under the first task and 0 under the
// second; arm 1 pays 0 under both. Pulling arm 0 once identifies the task.
TabularFamily two_arm_deterministic(std::size_t horizon = 1);

// As above but arm 0 pays Bernoulli(p_first) / Bernoulli(p_second).
TabularFamily two_arm_bernoulli(double p_first = 0.8, double p_second = 0.2,
                                std::size_t horizon = 1);

// Two deterministic tasks that start in different states, so the initial
// observation alone carries task information.
TabularFamily shifted_start_family(std::size_t horizon = 2);

// Randomized instance: 2-3 tasks, 2-3 states, 2-3 actions, horizon 1-3,
// mixed deterministic and Bernoulli rewards, sometimes task-dependent
// initial states.
TabularFamily random_family(numkit::Rng& rng);

// Continuous-control wrapper so the same agents run on tabular tasks:
// states are one-hot, the scalar action in [-1, 1] is binned into arms.
class TabularEnv final : public Env {
 public:
  TabularEnv(std::shared_ptr<const TabularFamily> family, std::size_t task_index);

  std::size_t state_dim() const override { return family_->n_states(); }
  std::size_t action_dim() const override { return 1; }
  double action_max() const override { return 1.0; }
  std::size_t horizon() const override { return family_->horizon(); }
  numkit::Array initial_state(numkit::Rng& rng) const override;
  StepOutcome step(const numkit::Array& state, const numkit::Array& action,
                   numkit::Rng& rng) const override;
  const TaskSpec& task() const override { return task_; }

  std::size_t bin_action(double a) const;
  static std::size_t argmax_state(const numkit::Array& one_hot);

 private:
  std::shared_ptr<const TabularFamily> family_;
  TaskSpec task_;
};

}  // namespace metacure::envkit
