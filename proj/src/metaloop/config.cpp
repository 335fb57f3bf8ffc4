#include "metacure/metaloop/config.hpp"

#include "metacure/common/errors.hpp"

namespace metacure::metaloop {

Variant parse_variant(const std::string& tag) {
  if (tag == "full") return Variant::Full;
  if (tag == "no-intrinsic") return Variant::NoIntrinsic;
  if (tag == "lambda-zero") return Variant::LambdaZero;
  if (tag == "separate-buffers") return Variant::SeparateBuffers;
  if (tag == "separate-encoders") return Variant::SeparateEncoders;
  if (tag == "no-exploiter") return Variant::NoExploiter;
  if (tag == "posterior-sampling") return Variant::PosteriorSampling;
  throw ConfigError("unknown variant tag: " + tag);
}

std::string variant_tag(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::NoIntrinsic: return "no-intrinsic";
    case Variant::LambdaZero: return "lambda-zero";
    case Variant::SeparateBuffers: return "separate-buffers";
    case Variant::SeparateEncoders: return "separate-encoders";
    case Variant::NoExploiter: return "no-exploiter";
    case Variant::PosteriorSampling: return "posterior-sampling";
  }
  throw ConfigError("variant_tag: invalid enum value");
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (n_train_tasks < 2) fail("n_train_tasks must be at least 2");
  if (n_test_tasks == 0) fail("n_test_tasks must be positive");
  if (episodes_per_trial < 2) fail("episodes_per_trial must be at least 2");
  if (horizon == 0) fail("horizon must be positive");
  if (env_step_budget == 0) fail("env_step_budget must be positive");
  if (steps_per_iteration == 0) fail("steps_per_iteration must be positive");
  if (eval_trials == 0) fail("eval_trials must be positive");
  if (z_dim == 0) fail("z_dim must be positive");
  for (const auto* h : {&encoder_hidden, &predictor_hidden, &policy_hidden, &q_hidden})
    for (std::size_t w : *h)
      if (w == 0) fail("hidden layer widths must be positive");
  if (lr <= 0.0) fail("lr must be positive");
  if (batch_size == 0) fail("batch_size must be positive");
  if (context_batch_size == 0) fail("context_batch_size must be positive");
  if (reencode_batch_size == 0) fail("reencode_batch_size must be positive");
  if (gamma < 0.0 || gamma >= 1.0) fail("gamma must lie in [0, 1)");
  if (tau <= 0.0 || tau > 1.0) fail("tau must lie in (0, 1]");
  if (alpha < 0.0) fail("alpha must be non-negative");
  if (beta_kl < 0.0) fail("beta_kl must be non-negative");
  if (lambda < 0.0) fail("lambda must be non-negative");
  if (replay_capacity == 0) fail("replay_capacity must be positive");
  if (workers == 0) fail("workers must be positive");
  if (family == envkit::EnvFamily::TabularBandit) {
    if (tabular_family != "two-arm-deterministic" &&
        tabular_family != "two-arm-bernoulli" && tabular_family != "shifted-start")
      fail("unknown tabular_family: " + tabular_family);
  }
}

double TrainConfig::effective_lambda() const {
  return variant == Variant::LambdaZero ? 0.0 : lambda;
}

bool TrainConfig::uses_intrinsic() const {
  return variant != Variant::NoIntrinsic && variant != Variant::PosteriorSampling;
}

bool TrainConfig::has_explorer() const {
  return variant != Variant::PosteriorSampling;
}

bool TrainConfig::has_exploiter() const {
  return variant != Variant::NoExploiter;
}

bool TrainConfig::reencodes_context() const {
  return uses_intrinsic() && (variant == Variant::NoExploiter ||
                              variant == Variant::SeparateEncoders);
}

}  // namespace metacure::metaloop
