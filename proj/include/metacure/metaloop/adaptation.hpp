#pragma once

#include <cstddef>
#include <vector>

#include "metacure/agents/replay.hpp"
#include "metacure/envkit/task.hpp"
#include "metacure/metaloop/config.hpp"
#include "metacure/metaloop/nets.hpp"
#include "metacure/numkit/array.hpp"
#include "metacure/numkit/rng.hpp"

namespace metacure::metaloop {

// One adaptation trial on one task: E episodes of interaction under the
// variant's collection scheme, with belief snapshots recorded next to every
// transition.
struct AdaptationResult {
  std::vector<agents::Rollout> rollouts;  // in collection order, tagged by source
  std::vector<double> episode_returns;    // external return per episode, length E
  std::vector<bool> episode_by_explorer;  // action source per episode
  bool success = false;    // any state of the final episode solved the task
  numkit::Array final_z;   // latent held through the final episode; empty if none
  // Latent held during each episode; empty entries mark episodes acted on the
  // live belief instead of a fixed sample.
  std::vector<numkit::Array> episode_z;
  std::size_t env_steps = 0;
};

// The default scheme runs the exploration policy for episodes 1..E-1 with the
// belief updated after every transition, draws one latent sample, and runs
// the exploitation policy for the final episode with that sample held fixed.
// Belief updates continue through the final episode so its transitions carry
// snapshots too. `deterministic_final` switches every exploitation-policy
// action (and, without one, the final episode) to the squashed mean;
// exploration episodes stay stochastic.
AdaptationResult run_adaptation(const envkit::Env& env, const Nets& nets,
                                const TrainConfig& cfg, std::size_t buffer_task,
                                bool deterministic_final, numkit::Rng& rng);

}  // namespace metacure::metaloop
