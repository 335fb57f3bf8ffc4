#pragma once

#include "metacure/envkit/task.hpp"

namespace metacure::envkit {

// 2-D navigation with a sparse shaped reward: zero outside the goal radius,
// rising linearly to 1 at the goal center, minus a quadratic control cost.
// The noisy variant adds an observation channel that reads pure noise inside
// a fixed disk and zero elsewhere.
struct PointRobotConfig {
  bool noisy = false;
  double goal_radius = 0.3;
  double control_cost = 0.1;
  double action_max = 0.1;
  std::size_t horizon = 32;
  double noise_center_x = -0.6;
  double noise_center_y = 0.6;
  double noise_radius = 0.3;
  double noise_sigma = 1.0;
};

// Goal uniform on the unit upper semicircle.
TaskSpec sample_point_robot_task(numkit::Rng& rng, bool noisy);

class PointRobotEnv final : public Env {
 public:
  PointRobotEnv(TaskSpec task, PointRobotConfig cfg);

  std::size_t state_dim() const override { return 3; }  // x, y, noise channel
  std::size_t action_dim() const override { return 2; }
  double action_max() const override { return cfg_.action_max; }
  std::size_t horizon() const override { return cfg_.horizon; }
  numkit::Array initial_state(numkit::Rng& rng) const override;
  StepOutcome step(const numkit::Array& state, const numkit::Array& action,
                   numkit::Rng& rng) const override;
  const TaskSpec& task() const override { return task_; }
  // Inside the goal radius.
  bool success(const numkit::Array& state) const override;

  bool in_noise_region(double x, double y) const;
  double goal_distance(double x, double y) const;

 private:
  TaskSpec task_;
  PointRobotConfig cfg_;
};

}  // namespace metacure::envkit
