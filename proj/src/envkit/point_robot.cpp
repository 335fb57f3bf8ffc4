#include "metacure/envkit/point_robot.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metacure::envkit {

TaskSpec sample_point_robot_task(numkit::Rng& rng, bool noisy) {
  TaskSpec t;
  t.family = noisy ? EnvFamily::PointRobotSparseNoise : EnvFamily::PointRobotSparse;
  const double angle = rng.uniform(0.0, 3.14159265358979323846);
  t.goal_x = std::cos(angle);
  t.goal_y = std::sin(angle);
  t.kappa = numkit::Array::from({t.goal_x, t.goal_y});
  return t;
}

PointRobotEnv::PointRobotEnv(TaskSpec task, PointRobotConfig cfg)
    : task_(std::move(task)), cfg_(cfg) {
  if (cfg_.horizon == 0) throw std::invalid_argument("PointRobotEnv: zero horizon");
  if (!(cfg_.goal_radius > 0.0))
    throw std::invalid_argument("PointRobotEnv: goal radius must be positive");
}

numkit::Array PointRobotEnv::initial_state(numkit::Rng&) const {
  return numkit::Array::from({0.0, 0.0, 0.0});
}

bool PointRobotEnv::in_noise_region(double x, double y) const {
  if (!cfg_.noisy) return false;
  const double dx = x - cfg_.noise_center_x;
  const double dy = y - cfg_.noise_center_y;
  return dx * dx + dy * dy <= cfg_.noise_radius * cfg_.noise_radius;
}

double PointRobotEnv::goal_distance(double x, double y) const {
  const double dx = x - task_.goal_x;
  const double dy = y - task_.goal_y;
  return std::sqrt(dx * dx + dy * dy);
}

bool PointRobotEnv::success(const numkit::Array& state) const {
  if (state.size() != 3)
    throw std::invalid_argument("PointRobotEnv::success: state must have 3 entries");
  return goal_distance(state[0], state[1]) <= cfg_.goal_radius;
}

StepOutcome PointRobotEnv::step(const numkit::Array& state, const numkit::Array& action,
                                numkit::Rng& rng) const {
  if (state.size() != 3)
    throw std::invalid_argument("PointRobotEnv::step: state must have 3 entries");
  if (action.size() != 2)
    throw std::invalid_argument("PointRobotEnv::step: action must have 2 entries");

  const double ax = std::clamp(action[0], -cfg_.action_max, cfg_.action_max);
  const double ay = std::clamp(action[1], -cfg_.action_max, cfg_.action_max);
  const double x = state[0] + ax;
  const double y = state[1] + ay;

  const double d = goal_distance(x, y);
  double reward = -cfg_.control_cost * (ax * ax + ay * ay);
  if (d <= cfg_.goal_radius) reward += 1.0 - d / cfg_.goal_radius;

  // The noise draw depends only on position, never on the goal, so two tasks
  // fed the same action sequence consume identical random streams.
  const double u = in_noise_region(x, y) ? rng.normal(0.0, cfg_.noise_sigma) : 0.0;

  StepOutcome out;
  out.next_state = numkit::Array::from({x, y, u});
  out.reward = reward;
  return out;
}

}  // namespace metacure::envkit
