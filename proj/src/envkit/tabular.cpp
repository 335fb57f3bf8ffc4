#include "metacure/envkit/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metacure::envkit {

TabularFamily::TabularFamily(std::size_t n_states, std::size_t n_actions,
                             std::size_t horizon, std::vector<double> prior,
                             std::vector<TabularTaskModel> tasks)
    : n_states_(n_states),
      n_actions_(n_actions),
      horizon_(horizon),
      prior_(std::move(prior)),
      tasks_(std::move(tasks)) {
  validate();
}

void TabularFamily::validate() const {
  if (n_states_ == 0 || n_actions_ == 0 || horizon_ == 0)
    throw std::invalid_argument("TabularFamily: empty dimensions");
  if (tasks_.empty() || prior_.size() != tasks_.size())
    throw std::invalid_argument("TabularFamily: prior/task count mismatch");
  double prior_sum = 0.0;
  for (double p : prior_) {
    if (p < 0.0) throw std::invalid_argument("TabularFamily: negative prior");
    prior_sum += p;
  }
  if (std::abs(prior_sum - 1.0) > 1e-12)
    throw std::invalid_argument("TabularFamily: prior does not sum to 1");
  for (const auto& task : tasks_) {
    if (task.dists.size() != n_states_ || task.init_dist.size() != n_states_)
      throw std::invalid_argument("TabularFamily: task tables have wrong state count");
    double init_sum = 0.0;
    for (double p : task.init_dist) init_sum += p;
    if (std::abs(init_sum - 1.0) > 1e-12)
      throw std::invalid_argument("TabularFamily: initial distribution does not sum to 1");
    for (const auto& row : task.dists) {
      if (row.size() != n_actions_)
        throw std::invalid_argument("TabularFamily: task tables have wrong action count");
      for (const auto& outcomes : row) {
        double sum = 0.0;
        for (const auto& o : outcomes) {
          if (o.prob < 0.0) throw std::invalid_argument("TabularFamily: negative prob");
          if (o.next_state >= n_states_)
            throw std::invalid_argument("TabularFamily: next state out of range");
          sum += o.prob;
        }
        if (std::abs(sum - 1.0) > 1e-12)
          throw std::invalid_argument("TabularFamily: outcome probs do not sum to 1");
      }
    }
  }
}

const std::vector<TabularOutcome>& TabularFamily::exact_model(std::size_t task,
                                                              std::size_t s,
                                                              std::size_t a) const {
  if (task >= tasks_.size() || s >= n_states_ || a >= n_actions_)
    throw std::invalid_argument("TabularFamily::exact_model: index out of range");
  return tasks_[task].dists[s][a];
}

double TabularFamily::outcome_prob(std::size_t task, std::size_t s, std::size_t a,
                                   double r, std::size_t s2) const {
  for (const auto& o : exact_model(task, s, a))
    if (o.reward == r && o.next_state == s2) return o.prob;
  return 0.0;
}

std::vector<std::pair<double, std::size_t>> TabularFamily::union_support(
    std::size_t s, std::size_t a) const {
  std::vector<std::pair<double, std::size_t>> support;
  for (std::size_t k = 0; k < tasks_.size(); ++k) {
    for (const auto& o : exact_model(k, s, a)) {
      if (o.prob <= 0.0) continue;
      const auto key = std::make_pair(o.reward, o.next_state);
      if (std::find(support.begin(), support.end(), key) == support.end())
        support.push_back(key);
    }
  }
  std::sort(support.begin(), support.end());
  return support;
}

double TabularFamily::init_prob(std::size_t task, std::size_t s) const {
  if (task >= tasks_.size() || s >= n_states_)
    throw std::invalid_argument("TabularFamily::init_prob: index out of range");
  return tasks_[task].init_dist[s];
}

double TabularFamily::marginal_init_prob(std::size_t s) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < tasks_.size(); ++k) acc += prior_[k] * init_prob(k, s);
  return acc;
}

numkit::Array TabularFamily::kappa_for(std::size_t task) const {
  if (task >= tasks_.size())
    throw std::invalid_argument("TabularFamily::kappa_for: index out of range");
  numkit::Array k({tasks_.size()}, 0.0);
  k[task] = 1.0;
  return k;
}

namespace {

TabularTaskModel deterministic_two_state(double arm0_reward, std::size_t start_state) {
  // Two states with identity transitions; rewards depend only on the arm.
  TabularTaskModel m;
  m.dists.resize(2);
  for (std::size_t s = 0; s < 2; ++s) {
    m.dists[s].resize(2);
    m.dists[s][0] = {{arm0_reward, s, 1.0}};
    m.dists[s][1] = {{0.0, s, 1.0}};
  }
  m.init_dist = {0.0, 0.0};
  m.init_dist[start_state] = 1.0;
  return m;
}

}  // namespace

TabularFamily two_arm_deterministic(std::size_t horizon) {
  return TabularFamily(2, 2, horizon, {0.5, 0.5},
                       {deterministic_two_state(1.0, 0), deterministic_two_state(0.0, 0)});
}

TabularFamily two_arm_bernoulli(double p_first, double p_second, std::size_t horizon) {
  auto bernoulli_task = [](double p) {
    TabularTaskModel m;
    m.dists.resize(2);
    for (std::size_t s = 0; s < 2; ++s) {
      m.dists[s].resize(2);
      m.dists[s][0] = {{1.0, s, p}, {0.0, s, 1.0 - p}};
      m.dists[s][1] = {{0.0, s, 1.0}};
    }
    m.init_dist = {1.0, 0.0};
    return m;
  };
  return TabularFamily(2, 2, horizon, {0.5, 0.5},
                       {bernoulli_task(p_first), bernoulli_task(p_second)});
}

TabularFamily shifted_start_family(std::size_t horizon) {
  return TabularFamily(2, 2, horizon, {0.5, 0.5},
                       {deterministic_two_state(1.0, 0), deterministic_two_state(0.0, 1)});
}

TabularFamily random_family(numkit::Rng& rng) {
  const std::size_t n_tasks = 2 + rng.index(2);
  const std::size_t n_states = 2 + rng.index(2);
  const std::size_t n_actions = 2 + rng.index(2);
  const std::size_t horizon = 1 + rng.index(3);
  static const double kRewardValues[] = {0.0, 0.5, 1.0};

  std::vector<double> prior(n_tasks);
  double prior_sum = 0.0;
  for (double& p : prior) {
    p = rng.uniform(0.2, 1.0);
    prior_sum += p;
  }
  for (double& p : prior) p /= prior_sum;

  const bool shared_start = rng.uniform() < 0.5;
  std::vector<double> shared_init(n_states);
  double init_sum = 0.0;
  for (double& p : shared_init) {
    p = rng.uniform(0.1, 1.0);
    init_sum += p;
  }
  for (double& p : shared_init) p /= init_sum;

  std::vector<TabularTaskModel> tasks(n_tasks);
  for (auto& task : tasks) {
    task.dists.resize(n_states);
    for (auto& row : task.dists) {
      row.resize(n_actions);
      for (auto& outcomes : row) {
        // Transition distribution over next states.
        std::vector<double> trans(n_states);
        double trans_sum = 0.0;
        for (double& p : trans) {
          p = rng.uniform(0.1, 1.0);
          trans_sum += p;
        }
        for (double& p : trans) p /= trans_sum;

        // Reward: deterministic value or a Bernoulli over {0, 1}.
        std::vector<std::pair<double, double>> reward_dist;
        if (rng.uniform() < 0.5) {
          reward_dist = {{kRewardValues[rng.index(3)], 1.0}};
        } else {
          const double p = rng.uniform(0.05, 0.95);
          reward_dist = {{1.0, p}, {0.0, 1.0 - p}};
        }

        for (const auto& [r, pr] : reward_dist)
          for (std::size_t s2 = 0; s2 < n_states; ++s2)
            outcomes.push_back({r, s2, pr * trans[s2]});
      }
    }
    if (shared_start) {
      task.init_dist = shared_init;
    } else {
      task.init_dist.resize(n_states);
      double s = 0.0;
      for (double& p : task.init_dist) {
        p = rng.uniform(0.1, 1.0);
        s += p;
      }
      for (double& p : task.init_dist) p /= s;
    }
  }
  return TabularFamily(n_states, n_actions, horizon, std::move(prior), std::move(tasks));
}

TabularEnv::TabularEnv(std::shared_ptr<const TabularFamily> family, std::size_t task_index)
    : family_(std::move(family)) {
  if (family_ == nullptr) throw std::invalid_argument("TabularEnv: null family");
  if (task_index >= family_->n_tasks())
    throw std::invalid_argument("TabularEnv: task index out of range");
  task_.family = EnvFamily::TabularBandit;
  task_.tabular_index = task_index;
  task_.kappa = family_->kappa_for(task_index);
}

numkit::Array TabularEnv::initial_state(numkit::Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t s0 = family_->n_states() - 1;
  for (std::size_t s = 0; s < family_->n_states(); ++s) {
    acc += family_->init_prob(task_.tabular_index, s);
    if (u < acc) {
      s0 = s;
      break;
    }
  }
  numkit::Array state({family_->n_states()}, 0.0);
  state[s0] = 1.0;
  return state;
}

std::size_t TabularEnv::bin_action(double a) const {
  const double clipped = std::clamp(a, -1.0, 1.0);
  const double scaled = (clipped + 1.0) / 2.0 * static_cast<double>(family_->n_actions());
  auto arm = static_cast<std::size_t>(scaled);
  return std::min(arm, family_->n_actions() - 1);
}

std::size_t TabularEnv::argmax_state(const numkit::Array& one_hot) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < one_hot.size(); ++i)
    if (one_hot[i] > one_hot[best]) best = i;
  return best;
}

StepOutcome TabularEnv::step(const numkit::Array& state, const numkit::Array& action,
                             numkit::Rng& rng) const {
  if (state.size() != family_->n_states())
    throw std::invalid_argument("TabularEnv::step: state width mismatch");
  if (action.size() != 1)
    throw std::invalid_argument("TabularEnv::step: action must be scalar");
  const std::size_t s = argmax_state(state);
  const std::size_t arm = bin_action(action[0]);
  const auto& outcomes = family_->exact_model(task_.tabular_index, s, arm);

  const double u = rng.uniform();
  double acc = 0.0;
  const TabularOutcome* picked = &outcomes.back();
  for (const auto& o : outcomes) {
    acc += o.prob;
    if (u < acc) {
      picked = &o;
      break;
    }
  }

  StepOutcome out;
  out.next_state = numkit::Array(std::vector<std::size_t>{family_->n_states()}, 0.0);
  out.next_state[picked->next_state] = 1.0;
  out.reward = picked->reward;
  return out;
}

}  // namespace metacure::envkit
