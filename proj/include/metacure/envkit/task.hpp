#pragma once

#include <cstddef>
#include <memory>

#include "metacure/numkit/array.hpp"
#include "metacure/numkit/rng.hpp"

namespace metacure::envkit {

enum class EnvFamily { PointRobotSparse, PointRobotSparseNoise, TabularBandit };

// One task drawn from a family. kappa is the task identification vector; it
// is consumed only by the task-conditioned predictor, never by a policy.
struct TaskSpec {
  EnvFamily family = EnvFamily::PointRobotSparse;
  double goal_x = 0.0;
  double goal_y = 0.0;
  std::size_t tabular_index = 0;
  numkit::Array kappa;
};

struct StepOutcome {
  numkit::Array next_state;
  double reward = 0.0;
};

// A task-bound environment. step() is a pure function of (state, action,
// rng); episode termination is by the fixed horizon, tracked by the caller.
// Instances are immutable after construction and safe to share across
// threads as long as each thread uses its own Rng.
class Env {
 public:
  virtual ~Env() = default;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual double action_max() const = 0;
  virtual std::size_t horizon() const = 0;
  virtual numkit::Array initial_state(numkit::Rng& rng) const = 0;
  virtual StepOutcome step(const numkit::Array& state, const numkit::Array& action,
                           numkit::Rng& rng) const = 0;
  virtual const TaskSpec& task() const = 0;
  // Whether a state counts as solving the task; families without a success
  // notion keep the default.
  virtual bool success(const numkit::Array& /*state*/) const { return false; }
};

}  // namespace metacure::envkit
