#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "metacure/numkit/array.hpp"
#include "metacure/numkit/rng.hpp"

namespace metacure::agents {

// One environment transition. Exploration transitions also record the belief
// vector the agent held when it acted and the belief after absorbing the
// outcome; those snapshots condition the exploration critic and the reward
// relabeling, and deliberately do not track later encoder updates.
struct Transition {
  numkit::Array s;
  numkit::Array a;
  double r = 0.0;
  numkit::Array s2;
  bool done = false;
  std::size_t t = 0;  // timestep within the episode
  numkit::Array belief_before;
  numkit::Array belief_after;
};

// One episode. Exploitation rollouts keep the packed transition rows of the
// exploration phase that preceded them, so training can re-encode that
// context under the current encoder.
struct Rollout {
  std::size_t task = 0;
  bool explorer = true;
  std::vector<Transition> steps;
  numkit::Array exploration_context;  // [N, transition_dim]; exploiter only
};

// Per-task storage with separate exploration and exploitation streams, both
// FIFO over whole rollouts: when a stream exceeds its transition capacity,
// oldest rollouts are dropped first.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t n_tasks, std::size_t capacity_per_stream);

  void add(Rollout r);

  std::size_t n_tasks() const { return explorer_.size(); }
  std::size_t transition_count(std::size_t task, bool explorer) const;
  std::size_t rollout_count(std::size_t task, bool explorer) const;

  // Points into buffer storage; valid until the next add().
  struct Ref {
    const Rollout* rollout = nullptr;
    std::size_t index = 0;
    const Transition& get() const { return rollout->steps[index]; }
  };

  // n transitions uniformly with replacement from one stream.
  std::vector<Ref> sample(std::size_t task, bool explorer, std::size_t n,
                          numkit::Rng& rng) const;

  // n transitions uniformly with replacement from the union of both streams
  // of one task, so every stored transition is equally likely regardless of
  // which policy collected it.
  std::vector<Ref> sample_any(std::size_t task, std::size_t n,
                              numkit::Rng& rng) const;

  // One rollout uniformly from a stream.
  const Rollout& sample_rollout(std::size_t task, bool explorer,
                                numkit::Rng& rng) const;

  // Stored rollout by position (0 = oldest); lets callers scan a stream.
  const Rollout& rollout_at(std::size_t task, bool explorer, std::size_t i) const;

 private:
  struct Stream {
    std::deque<Rollout> rollouts;
    std::vector<std::size_t> cumulative;  // running transition counts
    std::size_t transitions = 0;
    void rebuild_cumulative();
  };
  const Stream& stream_at(std::size_t task, bool explorer) const;
  std::vector<Stream> explorer_;
  std::vector<Stream> exploiter_;
  std::size_t capacity_;
};

}  // namespace metacure::agents
