#include "metacure/metaloop/adaptation.hpp"

#include <stdexcept>

#include "metacure/agents/actor_critic.hpp"
#include "metacure/inference/encoder.hpp"

namespace metacure::metaloop {

using agents::Rollout;
using agents::Transition;
using inference::BeliefState;
using numkit::Array;
using numkit::Rng;

namespace {

Array join(const Array& state, const Array& cond) {
  Array obs({state.size() + cond.size()});
  std::size_t j = 0;
  for (std::size_t i = 0; i < state.size(); ++i) obs[j++] = state[i];
  for (std::size_t i = 0; i < cond.size(); ++i) obs[j++] = cond[i];
  return obs;
}

struct EpisodeRunner {
  const envkit::Env& env;
  const Nets& nets;
  BeliefState& obs_belief;     // conditions exploration actions and snapshots
  BeliefState& latent_belief;  // the posterior exploitation latents come from
  Rng& rng;
  bool track_success = false;
  bool success = false;

  // One episode. A null `z` means the exploration policy acts on the live
  // belief vector; otherwise the exploitation policy acts on the fixed
  // latent. Transitions are appended to `rollout`.
  double run(const Array* z, bool deterministic, Rollout& rollout) {
    const std::size_t T = env.horizon();
    Array s = env.initial_state(rng);
    double ret = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      Transition tr;
      tr.belief_before = obs_belief.belief_vector();
      const Array obs = z == nullptr ? join(s, tr.belief_before) : join(s, *z);
      const Array a =
          z == nullptr
              ? agents::policy_act(nets.explorer, "", nets.explorer_spec, obs, rng,
                                   deterministic)
              : agents::policy_act(nets.exploiter, "", nets.exploiter_spec, obs,
                                   rng, deterministic);
      const envkit::StepOutcome out = env.step(s, a, rng);
      const Array row = inference::pack_transition(s, a, out.reward, out.next_state);
      obs_belief.update(row);
      latent_belief.update(row);
      tr.s = s;
      tr.a = a;
      tr.r = out.reward;
      tr.s2 = out.next_state;
      tr.done = t + 1 == T;  // fixed-horizon end, no bootstrap past it
      tr.t = t;
      tr.belief_after = obs_belief.belief_vector();
      rollout.steps.push_back(std::move(tr));
      ret += out.reward;
      if (track_success && env.success(out.next_state)) success = true;
      s = out.next_state;
    }
    return ret;
  }
};

Array pack_rollout(const Rollout& r, std::size_t transition_dim) {
  Array rows({r.steps.size(), transition_dim});
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    const Transition& tr = r.steps[i];
    const Array row = inference::pack_transition(tr.s, tr.a, tr.r, tr.s2);
    for (std::size_t j = 0; j < transition_dim; ++j) rows.at(i, j) = row[j];
  }
  return rows;
}

}  // namespace

AdaptationResult run_adaptation(const envkit::Env& env, const Nets& nets,
                                const TrainConfig& cfg, std::size_t buffer_task,
                                bool deterministic_final, numkit::Rng& rng) {
  const std::size_t E = cfg.episodes_per_trial;
  if (E < 2)
    throw std::invalid_argument("run_adaptation: at least two episodes required");

  BeliefState obs_belief(nets.belief_encoder(), "", nets.encoder_spec);
  BeliefState latent_belief(nets.latent_encoder(), "", nets.encoder_spec);
  EpisodeRunner runner{env, nets, obs_belief, latent_belief, rng};

  AdaptationResult out;
  out.env_steps = E * env.horizon();

  if (cfg.variant == Variant::PosteriorSampling) {
    // A fresh latent hypothesis every episode; the first draw is from the
    // prior because no context has been absorbed yet.
    for (std::size_t e = 0; e < E; ++e) {
      const Array z = latent_belief.sample_z(rng);
      Rollout ep;
      ep.task = buffer_task;
      ep.explorer = false;
      runner.track_success = e + 1 == E;
      out.episode_returns.push_back(runner.run(&z, deterministic_final, ep));
      out.episode_by_explorer.push_back(false);
      out.episode_z.push_back(z);
      if (e + 1 == E) out.final_z = z;
      out.rollouts.push_back(std::move(ep));
    }
    out.success = runner.success;
    return out;
  }

  if (cfg.variant == Variant::NoExploiter) {
    // The exploration policy collects and is judged on every episode; the
    // whole trial is one rollout so prefixes reconstruct its belief history.
    Rollout phase;
    phase.task = buffer_task;
    phase.explorer = true;
    for (std::size_t e = 0; e < E; ++e) {
      const bool final_ep = e + 1 == E;
      runner.track_success = final_ep;
      out.episode_returns.push_back(
          runner.run(nullptr, final_ep && deterministic_final, phase));
      out.episode_by_explorer.push_back(true);
      out.episode_z.emplace_back();
    }
    out.rollouts.push_back(std::move(phase));
    out.success = runner.success;
    return out;
  }

  Rollout exploration;
  exploration.task = buffer_task;
  exploration.explorer = true;
  for (std::size_t e = 0; e + 1 < E; ++e) {
    out.episode_returns.push_back(runner.run(nullptr, false, exploration));
    out.episode_by_explorer.push_back(true);
    out.episode_z.emplace_back();
  }

  // One latent draw for the whole exploitation episode.
  const Array z = latent_belief.sample_z(rng);
  Rollout exploitation;
  exploitation.task = buffer_task;
  exploitation.explorer = false;
  exploitation.exploration_context =
      pack_rollout(exploration, nets.encoder_spec.transition_dim);
  runner.track_success = true;
  out.episode_returns.push_back(runner.run(&z, deterministic_final, exploitation));
  out.episode_by_explorer.push_back(false);
  out.episode_z.push_back(z);
  out.final_z = z;
  out.success = runner.success;
  out.rollouts.push_back(std::move(exploration));
  out.rollouts.push_back(std::move(exploitation));
  return out;
}

}  // namespace metacure::metaloop
