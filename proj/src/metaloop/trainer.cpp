#include "metacure/metaloop/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

#include "metacure/common/errors.hpp"
#include "metacure/envkit/point_robot.hpp"

namespace metacure::metaloop {

using agents::LatentActorCriticRefs;
using agents::LatentBatch;
using agents::ReplayBuffer;
using agents::Rollout;
using agents::SacBatch;
using agents::SacStats;
using agents::Transition;
using numkit::Array;
using numkit::Graph;
using numkit::GraphNode;
using numkit::Rng;

struct Trainer::TrainAccums {
  Accum pred_meta, pred_task, kl;
  Accum explorer_critic, explorer_policy;
  Accum exploiter_critic, exploiter_policy;
  Accum intrinsic, exploration_reward;
};

namespace {

bool point_robot_family(envkit::EnvFamily f) {
  return f == envkit::EnvFamily::PointRobotSparse ||
         f == envkit::EnvFamily::PointRobotSparseNoise;
}

envkit::PointRobotConfig point_robot_config(const TrainConfig& cfg) {
  envkit::PointRobotConfig pc;
  pc.noisy = cfg.family == envkit::EnvFamily::PointRobotSparseNoise;
  pc.horizon = cfg.horizon;
  return pc;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void copy_row(Array& dst, std::size_t r, const Array& src) {
  for (std::size_t j = 0; j < src.size(); ++j) dst.at(r, j) = src[j];
}

}  // namespace

Trainer::Trainer(TrainConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), seed_(seed) {
  cfg_.validate();
  build_envs();

  Rng init_rng = Rng::stream(seed_, "init");
  const envkit::Env& probe = *train_envs_.front();
  nets_ = std::make_unique<Nets>(cfg_, probe, probe.task().kappa.size(), init_rng);
  rewarder_ = std::make_unique<curiosity::IntrinsicRewarder>(
      nets_->meta_spec, nets_->task_spec, cfg_.effective_lambda());
  buffer_a_ = std::make_unique<ReplayBuffer>(cfg_.n_train_tasks, cfg_.replay_capacity);
  if (cfg_.variant == Variant::SeparateBuffers)
    buffer_b_ =
        std::make_unique<ReplayBuffer>(cfg_.n_train_tasks, cfg_.replay_capacity);

  hyper_.gamma = cfg_.gamma;
  hyper_.tau = cfg_.tau;
  hyper_.alpha = cfg_.alpha;
  hyper_.beta_kl = cfg_.beta_kl;
  hyper_.lr = cfg_.lr;
}

void Trainer::build_envs() {
  if (point_robot_family(cfg_.family)) {
    const envkit::PointRobotConfig pc = point_robot_config(cfg_);
    Rng rng = Rng::stream(seed_, "tasks");
    for (std::size_t m = 0; m < cfg_.n_train_tasks; ++m)
      train_envs_.push_back(std::make_unique<envkit::PointRobotEnv>(
          envkit::sample_point_robot_task(rng, pc.noisy), pc));
    for (std::size_t i = 0; i < cfg_.n_test_tasks; ++i)
      test_envs_.push_back(std::make_unique<envkit::PointRobotEnv>(
          envkit::sample_point_robot_task(rng, pc.noisy), pc));
    return;
  }
  if (cfg_.tabular_family == "two-arm-deterministic")
    tabular_family_ = std::make_shared<const envkit::TabularFamily>(
        envkit::two_arm_deterministic());
  else if (cfg_.tabular_family == "two-arm-bernoulli")
    tabular_family_ =
        std::make_shared<const envkit::TabularFamily>(envkit::two_arm_bernoulli());
  else
    tabular_family_ = std::make_shared<const envkit::TabularFamily>(
        envkit::shifted_start_family());
  if (cfg_.n_train_tasks != tabular_family_->n_tasks())
    throw ConfigError("config: n_train_tasks must equal the tabular family's task "
                      "count (" +
                      std::to_string(tabular_family_->n_tasks()) + ")");
  for (std::size_t m = 0; m < cfg_.n_train_tasks; ++m)
    train_envs_.push_back(std::make_unique<envkit::TabularEnv>(tabular_family_, m));
  // Tabular families enumerate their tasks, so held-out draws cycle the same
  // set; they exist to keep the evaluation path exercised.
  for (std::size_t i = 0; i < cfg_.n_test_tasks; ++i)
    test_envs_.push_back(std::make_unique<envkit::TabularEnv>(
        tabular_family_, i % tabular_family_->n_tasks()));
}

std::size_t Trainer::planned_iterations() const {
  const std::size_t per_iter = cfg_.episodes_per_trial *
                               train_envs_.front()->horizon() * cfg_.n_train_tasks;
  return std::max<std::size_t>(1, cfg_.env_step_budget / per_iter);
}

std::size_t Trainer::intrinsic_calls() const { return rewarder_->intrinsic_calls(); }

void Trainer::route(Rollout r) {
  ReplayBuffer& buf = r.explorer || !buffer_b_ ? *buffer_a_ : *buffer_b_;
  buf.add(std::move(r));
}

void Trainer::collect(std::size_t k) {
  const std::size_t M = cfg_.n_train_tasks;
  std::vector<AdaptationResult> results(M);
  auto worker = [&](std::size_t w, std::size_t stride) {
    for (std::size_t m = w; m < M; m += stride) {
      Rng rng = Rng::stream(seed_, "collect", m, k);
      results[m] = run_adaptation(*train_envs_[m], *nets_, cfg_, m, false, rng);
    }
  };
  const std::size_t workers = std::min(cfg_.workers, M);
  if (workers <= 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      threads.emplace_back(worker, w, workers);
    for (auto& t : threads) t.join();
  }
  // Buffer insertion stays on this thread in task order, so the stored
  // sequence is identical for any worker count.
  for (std::size_t m = 0; m < M; ++m) {
    for (Rollout& r : results[m].rollouts) route(std::move(r));
    env_steps_ += results[m].env_steps;
  }
}

void Trainer::train_one(std::size_t m, Rng& rng, TrainAccums& acc) {
  const Array& kappa = train_envs_[m]->task().kappa;
  const std::size_t state_dim = train_envs_[m]->state_dim();
  const std::size_t action_dim = train_envs_[m]->action_dim();
  const std::size_t belief_dim = 2 * cfg_.z_dim;

  if (cfg_.uses_intrinsic() && !cfg_.reencodes_context()) {
    // Predictor step on recorded belief snapshots: batch cost independent of
    // context length, no encoder gradients.
    const auto refs = buffer_a_->sample_any(m, cfg_.batch_size, rng);
    const std::size_t b = refs.size();
    curiosity::RecordedBatch batch;
    batch.belief_rows = Array({b, belief_dim});
    batch.sa_rows = Array({b, state_dim + action_dim});
    batch.kappa_rows = Array({b, kappa.size()});
    batch.targets = Array({b, 1 + state_dim});
    for (std::size_t i = 0; i < b; ++i) {
      const Transition& tr = refs[i].get();
      copy_row(batch.belief_rows, i, tr.belief_before);
      for (std::size_t j = 0; j < state_dim; ++j) batch.sa_rows.at(i, j) = tr.s[j];
      for (std::size_t j = 0; j < action_dim; ++j)
        batch.sa_rows.at(i, state_dim + j) = tr.a[j];
      copy_row(batch.kappa_rows, i, kappa);
      batch.targets.at(i, 0) = tr.r;
      for (std::size_t j = 0; j < state_dim; ++j)
        batch.targets.at(i, 1 + j) = tr.s2[j];
    }
    Graph g;
    const curiosity::PredictorLossNodes nodes = curiosity::predictor_training_loss(
        g, nets_->meta_pred, "", nets_->meta_spec, nets_->task_pred, "",
        nets_->task_spec, batch);
    acc.pred_meta.add(nodes.meta->value()[0]);
    acc.pred_task.add(nodes.task->value()[0]);
    g.backward(nodes.total);
    numkit::adam_step(nets_->meta_pred, cfg_.lr);
    numkit::adam_step(nets_->task_pred, cfg_.lr);
  } else if (cfg_.uses_intrinsic()) {
    // Re-encoding predictor step: each element's belief is recomputed from
    // its stored prefix, so this also trains the belief-side encoder, with
    // the prior-divergence penalty attached.
    const auto refs = buffer_a_->sample_any(m, cfg_.reencode_batch_size, rng);
    const std::size_t b = refs.size();
    curiosity::PredictorBatch batch;
    batch.sa_rows = Array({b, state_dim + action_dim});
    batch.kappa_rows = Array({b, kappa.size()});
    batch.targets = Array({b, 1 + state_dim});
    const std::size_t td = nets_->encoder_spec.transition_dim;
    std::size_t total_rows = 0;
    batch.offsets.assign(1, 0);
    for (std::size_t i = 0; i < b; ++i) {
      const Rollout& ro = *refs[i].rollout;
      total_rows += ro.exploration_context.size() == 0
                        ? refs[i].index
                        : ro.exploration_context.rows() + refs[i].index;
      batch.offsets.push_back(total_rows);
    }
    batch.context_rows = Array({total_rows, td});
    std::size_t at = 0;
    for (std::size_t i = 0; i < b; ++i) {
      const Rollout& ro = *refs[i].rollout;
      if (ro.exploration_context.size() != 0)
        for (std::size_t r = 0; r < ro.exploration_context.rows(); ++r, ++at)
          for (std::size_t j = 0; j < td; ++j)
            batch.context_rows.at(at, j) = ro.exploration_context.at(r, j);
      for (std::size_t r = 0; r < refs[i].index; ++r, ++at) {
        const Transition& pre = ro.steps[r];
        const Array row = inference::pack_transition(pre.s, pre.a, pre.r, pre.s2);
        for (std::size_t j = 0; j < td; ++j) batch.context_rows.at(at, j) = row[j];
      }
      const Transition& tr = refs[i].get();
      for (std::size_t j = 0; j < state_dim; ++j) batch.sa_rows.at(i, j) = tr.s[j];
      for (std::size_t j = 0; j < action_dim; ++j)
        batch.sa_rows.at(i, state_dim + j) = tr.a[j];
      copy_row(batch.kappa_rows, i, kappa);
      batch.targets.at(i, 0) = tr.r;
      for (std::size_t j = 0; j < state_dim; ++j)
        batch.targets.at(i, 1 + j) = tr.s2[j];
    }
    Graph g;
    const curiosity::PredictorLossNodes nodes = curiosity::predictor_training_loss(
        g, nets_->belief_encoder(), "", nets_->encoder_spec, nets_->meta_pred, "",
        nets_->meta_spec, nets_->task_pred, "", nets_->task_spec, batch);
    GraphNode* mean_kl = g.mean_all(
        inference::kl_to_prior_graph(g, nodes.beliefs.mean, nodes.beliefs.var));
    GraphNode* total = g.add(nodes.total, g.affine(mean_kl, cfg_.beta_kl, 0.0));
    acc.pred_meta.add(nodes.meta->value()[0]);
    acc.pred_task.add(nodes.task->value()[0]);
    acc.kl.add(mean_kl->value()[0]);
    g.backward(total);
    numkit::adam_step(nets_->belief_encoder(), cfg_.lr);
    numkit::adam_step(nets_->meta_pred, cfg_.lr);
    numkit::adam_step(nets_->task_pred, cfg_.lr);
  }

  if (cfg_.has_exploiter()) {
    const ReplayBuffer& pol_buf = exploiter_buffer();
    const auto refs = pol_buf.sample_any(m, cfg_.batch_size, rng);
    // Context comes from exploration experience; the posterior-sampling
    // scheme has only exploitation experience, which is its context.
    const auto ctx =
        buffer_a_->sample(m, cfg_.has_explorer(), cfg_.context_batch_size, rng);
    const std::size_t b = refs.size();
    LatentBatch batch;
    batch.states = Array({b, state_dim});
    batch.actions = Array({b, action_dim});
    batch.rewards = Array({b});
    batch.states2 = Array({b, state_dim});
    batch.not_done = Array({b});
    for (std::size_t i = 0; i < b; ++i) {
      const Transition& tr = refs[i].get();
      copy_row(batch.states, i, tr.s);
      copy_row(batch.actions, i, tr.a);
      batch.rewards[i] = tr.r;
      copy_row(batch.states2, i, tr.s2);
      batch.not_done[i] = tr.done ? 0.0 : 1.0;
    }
    const std::size_t td = nets_->encoder_spec.transition_dim;
    batch.context_rows = Array({ctx.size(), td});
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      const Transition& tr = ctx[i].get();
      const Array row = inference::pack_transition(tr.s, tr.a, tr.r, tr.s2);
      copy_row(batch.context_rows, i, row);
    }
    LatentActorCriticRefs refs_l{
        {&nets_->exploiter, nets_->exploiter_spec, "", &nets_->exploiter_q,
         &nets_->exploiter_q_target, nets_->exploiter_q_spec},
        &nets_->latent_encoder(),
        "",
        nets_->encoder_spec};
    const SacStats st = agents::sac_update_latent(refs_l, batch, hyper_, rng);
    acc.exploiter_critic.add(st.critic_loss);
    acc.exploiter_policy.add(st.policy_loss);
    acc.kl.add(st.kl);
  }

  if (cfg_.has_explorer()) {
    const auto refs = buffer_a_->sample_any(m, cfg_.batch_size, rng);
    const std::size_t b = refs.size();
    SacBatch batch;
    batch.obs = Array({b, state_dim + belief_dim});
    batch.actions = Array({b, action_dim});
    batch.rewards = Array({b});
    batch.obs2 = Array({b, state_dim + belief_dim});
    batch.not_done = Array({b});
    double gap_sum = 0.0;
    double reward_sum = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
      const Transition& tr = refs[i].get();
      for (std::size_t j = 0; j < state_dim; ++j) batch.obs.at(i, j) = tr.s[j];
      for (std::size_t j = 0; j < belief_dim; ++j)
        batch.obs.at(i, state_dim + j) = tr.belief_before[j];
      copy_row(batch.actions, i, tr.a);
      for (std::size_t j = 0; j < state_dim; ++j) batch.obs2.at(i, j) = tr.s2[j];
      for (std::size_t j = 0; j < belief_dim; ++j)
        batch.obs2.at(i, state_dim + j) = tr.belief_after[j];
      batch.not_done[i] = tr.done ? 0.0 : 1.0;
      // Exploration rewards are recomputed from the current predictors at
      // every step; the buffer keeps only the environment's reward.
      double gap = 0.0;
      if (cfg_.uses_intrinsic())
        gap = rewarder_->intrinsic_reward(nets_->meta_pred, "", nets_->task_pred,
                                          "", tr.belief_before, kappa, tr.s, tr.a,
                                          tr.r, tr.s2);
      const double r = rewarder_->exploration_reward(gap, tr.r);
      batch.rewards[i] = r;
      gap_sum += gap;
      reward_sum += r;
    }
    agents::ActorCriticRefs refs_e{&nets_->explorer,   nets_->explorer_spec, "",
                                   &nets_->explorer_q, &nets_->explorer_q_target,
                                   nets_->explorer_q_spec};
    const SacStats st = agents::sac_update(refs_e, batch, hyper_, rng);
    acc.explorer_critic.add(st.critic_loss);
    acc.explorer_policy.add(st.policy_loss);
    acc.intrinsic.add(gap_sum / static_cast<double>(b));
    acc.exploration_reward.add(reward_sum / static_cast<double>(b));
  }
}

IterationStats Trainer::train(std::size_t k) {
  const std::size_t M = cfg_.n_train_tasks;
  std::vector<Rng> rngs;
  rngs.reserve(M);
  for (std::size_t m = 0; m < M; ++m)
    rngs.push_back(Rng::stream(seed_, "train", m, k));
  TrainAccums acc;
  for (std::size_t s = 0; s < cfg_.steps_per_iteration; ++s)
    for (std::size_t m = 0; m < M; ++m) train_one(m, rngs[m], acc);

  IterationStats st;
  st.pred_meta = acc.pred_meta.mean();
  st.pred_task = acc.pred_task.mean();
  st.kl = acc.kl.mean();
  st.explorer_critic = acc.explorer_critic.mean();
  st.explorer_policy = acc.explorer_policy.mean();
  st.exploiter_critic = acc.exploiter_critic.mean();
  st.exploiter_policy = acc.exploiter_policy.mean();
  st.mean_intrinsic = acc.intrinsic.mean();
  st.mean_exploration_reward = acc.exploration_reward.mean();
  return st;
}

IterationStats Trainer::run_iteration() {
  const std::size_t k = iteration_;
  collect(k);
  IterationStats st = train(k);
  ++iteration_;
  st.iteration = iteration_;
  st.env_steps = env_steps_;
  if (cfg_.eval_interval > 0 && (iteration_ % cfg_.eval_interval == 0 ||
                                 iteration_ == planned_iterations())) {
    const EvalReport rep = evaluate(cfg_.eval_trials);
    st.evaluated = true;
    st.eval_return = rep.mean_final_return;
    st.eval_success = rep.success_rate;
  }
  for (double v : {st.pred_meta, st.pred_task, st.kl, st.explorer_critic,
                   st.explorer_policy, st.exploiter_critic, st.exploiter_policy,
                   st.mean_intrinsic, st.mean_exploration_reward, st.eval_return,
                   st.eval_success})
    if (!std::isfinite(v))
      throw NumericError("iteration " + std::to_string(st.iteration) +
                         " produced a non-finite metric");
  return st;
}

void Trainer::run(std::ostream& metrics, const CheckpointHook& hook) {
  write_metrics_header(metrics);
  const std::size_t planned = planned_iterations();
  while (iteration_ < planned) {
    const IterationStats st = run_iteration();
    write_metrics_row(metrics, st);
    metrics.flush();
    if (st.evaluated && hook) hook(*this, iteration_);
  }
}

EvalReport Trainer::evaluate(std::size_t trials_per_task) const {
  return evaluate(trials_per_task, seed_);
}

EvalReport Trainer::evaluate(std::size_t trials_per_task,
                             std::uint64_t eval_seed) const {
  EvalReport rep;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test_envs_.size(); ++i) {
    for (std::size_t j = 0; j < trials_per_task; ++j) {
      Rng rng = Rng::stream(eval_seed, "eval", i, j);
      const AdaptationResult res =
          run_adaptation(*test_envs_[i], *nets_, cfg_, i, true, rng);
      EvalRow row;
      row.task = i;
      row.trial = j;
      row.final_return = res.episode_returns.back();
      row.success = res.success;
      row.episode_returns = res.episode_returns;
      sum += row.final_return;
      hits += row.success ? 1 : 0;
      rep.rows.push_back(std::move(row));
    }
  }
  const double n = static_cast<double>(rep.rows.size());
  rep.mean_final_return = sum / n;
  rep.success_rate = static_cast<double>(hits) / n;
  return rep;
}

HeatmapGrid Trainer::intrinsic_heatmap(std::size_t grid_n,
                                       std::size_t n_probe_tasks) const {
  if (!point_robot_family(cfg_.family))
    throw ConfigError("heatmap requires a point-robot family");
  if (grid_n == 0 || n_probe_tasks == 0)
    throw ConfigError("heatmap needs a positive grid size and task count");

  Rng rng = Rng::stream(seed_, "heatmap");
  const envkit::PointRobotConfig pc = point_robot_config(cfg_);
  std::vector<std::unique_ptr<envkit::PointRobotEnv>> envs;
  for (std::size_t t = 0; t < n_probe_tasks; ++t)
    envs.push_back(std::make_unique<envkit::PointRobotEnv>(
        envkit::sample_point_robot_task(rng, pc.noisy), pc));

  // A local gap evaluator keeps the trainer's call counter honest.
  curiosity::IntrinsicRewarder probe(nets_->meta_spec, nets_->task_spec,
                                     cfg_.effective_lambda());
  const Array prior_belief({2 * cfg_.z_dim});
  const Array action({train_envs_.front()->action_dim()});

  HeatmapGrid grid;
  grid.n = grid_n;
  const double lo = -1.5;
  const double hi = 1.5;
  for (std::size_t i = 0; i < grid_n; ++i) {
    const double c =
        lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(grid_n);
    grid.xs.push_back(c);
    grid.ys.push_back(c);
  }
  for (std::size_t iy = 0; iy < grid_n; ++iy) {
    for (std::size_t ix = 0; ix < grid_n; ++ix) {
      const Array s = Array::from({grid.xs[ix], grid.ys[iy], 0.0});
      double gap_sum = 0.0;
      double err_sum = 0.0;
      for (const auto& env : envs) {
        const envkit::StepOutcome out = env->step(s, action, rng);
        gap_sum += probe.intrinsic_reward(nets_->meta_pred, "", nets_->task_pred,
                                          "", prior_belief, env->task().kappa, s,
                                          action, out.reward, out.next_state);
        const Array pred = curiosity::predict_outcome(
            nets_->meta_pred, "", nets_->meta_spec, prior_belief, s, action);
        err_sum += curiosity::outcome_sq_error(pred, out.reward, out.next_state);
      }
      grid.gap.push_back(gap_sum / static_cast<double>(envs.size()));
      grid.meta_err.push_back(err_sum / static_cast<double>(envs.size()));
    }
  }
  return grid;
}

void Trainer::write_metrics_header(std::ostream& os) {
  os << "iteration,env_steps,pred_meta,pred_task,kl,explorer_critic,"
        "explorer_policy,exploiter_critic,exploiter_policy,mean_intrinsic,"
        "mean_exploration_reward,eval_return,eval_success\n";
}

void Trainer::write_metrics_row(std::ostream& os, const IterationStats& st) {
  os << st.iteration << ',' << st.env_steps;
  for (double v : {st.pred_meta, st.pred_task, st.kl, st.explorer_critic,
                   st.explorer_policy, st.exploiter_critic, st.exploiter_policy,
                   st.mean_intrinsic, st.mean_exploration_reward})
    os << ',' << fmt(v);
  if (st.evaluated)
    os << ',' << fmt(st.eval_return) << ',' << fmt(st.eval_success) << '\n';
  else
    os << ",,\n";
}

}  // namespace metacure::metaloop
