#pragma once

#include <cstddef>
#include <string>

#include "metacure/agents/actor_critic.hpp"
#include "metacure/inference/encoder.hpp"
#include "metacure/numkit/array.hpp"
#include "metacure/numkit/graph.hpp"
#include "metacure/numkit/params.hpp"
#include "metacure/numkit/rng.hpp"

namespace metacure::agents {

struct SacHyper {
  double gamma = 0.99;
  double tau = 0.005;    // target blend rate
  double alpha = 0.1;    // entropy weight
  double beta_kl = 1.0;  // belief-prior weight, used by the latent update
  double lr = 3e-4;
};

// One actor-critic: policy store, value store with its target copy.
struct ActorCriticRefs {
  numkit::ParamStore* policy = nullptr;
  PolicySpec policy_spec;
  std::string policy_prefix;
  numkit::ParamStore* q = nullptr;
  numkit::ParamStore* q_target = nullptr;
  QSpec q_spec;
};

// A batch whose conditioning is already part of the observation columns
// (e.g. belief-vector snapshots). Rewards are whatever the caller wants the
// critic to regress on.
struct SacBatch {
  numkit::Array obs;       // [B, obs_dim]
  numkit::Array actions;   // [B, action_dim]
  numkit::Array rewards;   // [B]
  numkit::Array obs2;      // [B, obs_dim]
  numkit::Array not_done;  // [B] of 0/1
};

// Bootstrapped regression targets, one column:
//   y = r + gamma * not_done * (min Q_target(obs2, a') - alpha * log pi(a'|obs2)).
numkit::Array td_targets(const ActorCriticRefs& nets, const SacBatch& batch,
                         const SacHyper& hyper, numkit::Rng& rng);

// Sum over value nets of the mean squared error against y ([B, 1]).
numkit::GraphNode* critic_loss_graph(numkit::Graph& g, numkit::ParamStore& q,
                                     const QSpec& spec,
                                     numkit::GraphNode* obs_actions,
                                     const numkit::Array& y);

// mean(alpha * log pi - min Q(obs, a)) with reparameterized actions.
numkit::GraphNode* policy_loss_graph(numkit::Graph& g, numkit::ParamStore& policy,
                                     const std::string& policy_prefix,
                                     const PolicySpec& policy_spec,
                                     numkit::ParamStore& q, const QSpec& q_spec,
                                     numkit::GraphNode* obs, const numkit::Array& eps,
                                     double alpha);

struct SacStats {
  double critic_loss = 0.0;
  double policy_loss = 0.0;
  double mean_q = 0.0;  // min-net value of the batch actions after the step
  double kl = 0.0;      // belief divergence (latent update only)
};

// One SAC step on a prepared batch: critic step, policy step (value-net
// gradients from the policy pass are discarded), then a target blend.
SacStats sac_update(ActorCriticRefs& nets, const SacBatch& batch,
                    const SacHyper& hyper, numkit::Rng& rng);

// The latent-conditioned variant: the batch carries raw states plus one
// context segment; the update re-encodes the context, draws one latent
// sample for the whole batch with gradients into the encoder, and adds
// beta_kl times the belief's divergence from the prior to the critic loss.
// Policy and targets see the same latent value with gradients stopped.
struct LatentBatch {
  numkit::Array states;        // [B, state_dim]
  numkit::Array actions;       // [B, action_dim]
  numkit::Array rewards;       // [B]
  numkit::Array states2;       // [B, state_dim]
  numkit::Array not_done;      // [B]
  numkit::Array context_rows;  // [N, transition_dim], one segment
};

struct LatentActorCriticRefs {
  ActorCriticRefs ac;  // policy obs = state | latent sample
  numkit::ParamStore* encoder = nullptr;
  std::string encoder_prefix;
  inference::EncoderSpec encoder_spec;
};

SacStats sac_update_latent(LatentActorCriticRefs& nets, const LatentBatch& batch,
                           const SacHyper& hyper, numkit::Rng& rng);

}  // namespace metacure::agents
