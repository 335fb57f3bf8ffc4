#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "metacure/numkit/array.hpp"
#include "metacure/numkit/graph.hpp"
#include "metacure/numkit/mlp.hpp"
#include "metacure/numkit/params.hpp"
#include "metacure/numkit/rng.hpp"

namespace metacure::agents {

// Stochastic policy: a diagonal Gaussian squashed by tanh and scaled to the
// action bound. The observation is the state concatenated with whatever
// conditions the policy (a latent task sample or a belief vector).
struct PolicySpec {
  std::size_t obs_dim = 0;
  std::size_t action_dim = 0;
  double action_max = 1.0;
  std::vector<std::size_t> hidden = {128, 128};
  double log_std_min = -20.0;
  double log_std_max = 2.0;

  numkit::MlpSpec mlp() const;  // obs -> hidden -> mean and raw log-std
  void validate() const;
};

void init_policy(numkit::ParamStore& params, const std::string& prefix,
                 const PolicySpec& spec, numkit::Rng& rng);

// Plain path: one action. Deterministic mode returns the squashed mean.
numkit::Array policy_act(const numkit::ParamStore& params, const std::string& prefix,
                         const PolicySpec& spec, const numkit::Array& obs,
                         numkit::Rng& rng, bool deterministic);

struct ActionSample {
  numkit::Array action;
  double log_prob = 0.0;  // density of the squashed, scaled action
};

ActionSample policy_sample(const numkit::ParamStore& params, const std::string& prefix,
                           const PolicySpec& spec, const numkit::Array& obs,
                           numkit::Rng& rng);

struct PolicyNodes {
  numkit::GraphNode* action = nullptr;    // [B, action_dim]
  numkit::GraphNode* log_prob = nullptr;  // [B, 1]
};

// Reparameterized graph path: actions and log densities for a batch of
// observations, with the noise draws supplied as a fixed [B, action_dim]
// array so the pass is a deterministic function of the parameters.
PolicyNodes policy_forward(numkit::Graph& g, numkit::ParamStore& params,
                           const std::string& prefix, const PolicySpec& spec,
                           numkit::GraphNode* obs, const numkit::Array& eps);

// Action-value nets: input is the observation concatenated with the action.
// Twin mode keeps two independent nets ("q1.", "q2." under the spec prefix)
// whose elementwise minimum is used wherever values are consumed.
struct QSpec {
  std::size_t obs_dim = 0;
  std::size_t action_dim = 0;
  std::vector<std::size_t> hidden = {128, 128};
  bool twin = true;

  numkit::MlpSpec mlp() const;  // obs+action -> hidden -> 1
  void validate() const;
  std::vector<std::string> net_prefixes() const;  // {"q1."} or {"q1.", "q2."}
};

void init_q(numkit::ParamStore& params, const QSpec& spec, numkit::Rng& rng);

// Minimum over the (one or two) nets: [B, 1].
numkit::GraphNode* q_min_forward(numkit::Graph& g, numkit::ParamStore& params,
                                 const QSpec& spec, numkit::GraphNode* obs_actions);

double q_min_eval(const numkit::ParamStore& params, const QSpec& spec,
                  const numkit::Array& obs_action_row);

// dst <- (1 - tau) * dst + tau * src over matching entries.
void polyak_update(const numkit::ParamStore& src, numkit::ParamStore& dst, double tau);

}  // namespace metacure::agents
