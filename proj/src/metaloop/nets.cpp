#include "metacure/metaloop/nets.hpp"

namespace metacure::metaloop {

using numkit::MutableStoreGroup;
using numkit::StoreGroup;

Nets::Nets(const TrainConfig& cfg, const envkit::Env& probe, std::size_t kappa_dim,
           numkit::Rng& rng) {
  const std::size_t state_dim = probe.state_dim();
  const std::size_t action_dim = probe.action_dim();

  encoder_spec.transition_dim = 2 * state_dim + action_dim + 1;
  encoder_spec.z_dim = cfg.z_dim;
  encoder_spec.hidden = cfg.encoder_hidden;

  meta_spec.cond_dim = 2 * cfg.z_dim;
  meta_spec.state_dim = state_dim;
  meta_spec.action_dim = action_dim;
  meta_spec.hidden = cfg.predictor_hidden;

  task_spec.cond_dim = kappa_dim;
  task_spec.state_dim = state_dim;
  task_spec.action_dim = action_dim;
  task_spec.hidden = cfg.predictor_hidden;

  explorer_spec.obs_dim = state_dim + 2 * cfg.z_dim;
  explorer_spec.action_dim = action_dim;
  explorer_spec.action_max = probe.action_max();
  explorer_spec.hidden = cfg.policy_hidden;

  exploiter_spec = explorer_spec;
  exploiter_spec.obs_dim = state_dim + cfg.z_dim;

  explorer_q_spec.obs_dim = explorer_spec.obs_dim;
  explorer_q_spec.action_dim = action_dim;
  explorer_q_spec.hidden = cfg.q_hidden;

  exploiter_q_spec = explorer_q_spec;
  exploiter_q_spec.obs_dim = exploiter_spec.obs_dim;

  // Fixed initialization order keeps runs reproducible; the belief-side twin
  // starts as an exact copy so splitting encoders changes no initial value.
  inference::init_encoder(encoder, "", encoder_spec, rng);
  curiosity::init_predictor(meta_pred, "", meta_spec, rng);
  curiosity::init_predictor(task_pred, "", task_spec, rng);
  agents::init_policy(explorer, "", explorer_spec, rng);
  agents::init_q(explorer_q, explorer_q_spec, rng);
  explorer_q_target = explorer_q;
  agents::init_policy(exploiter, "", exploiter_spec, rng);
  agents::init_q(exploiter_q, exploiter_q_spec, rng);
  exploiter_q_target = exploiter_q;

  split_encoders = cfg.variant == Variant::SeparateEncoders;
  if (split_encoders) encoder_b = encoder;
}

StoreGroup Nets::checkpoint_group() const {
  return {
      {"encoder.", &encoder},
      {"encoder_b.", &encoder_b},
      {"meta_pred.", &meta_pred},
      {"task_pred.", &task_pred},
      {"explorer.", &explorer},
      {"explorer_q.", &explorer_q},
      {"explorer_q_target.", &explorer_q_target},
      {"exploiter.", &exploiter},
      {"exploiter_q.", &exploiter_q},
      {"exploiter_q_target.", &exploiter_q_target},
  };
}

MutableStoreGroup Nets::mutable_group() {
  return {
      {"encoder.", &encoder},
      {"encoder_b.", &encoder_b},
      {"meta_pred.", &meta_pred},
      {"task_pred.", &task_pred},
      {"explorer.", &explorer},
      {"explorer_q.", &explorer_q},
      {"explorer_q_target.", &explorer_q_target},
      {"exploiter.", &exploiter},
      {"exploiter_q.", &exploiter_q},
      {"exploiter_q_target.", &exploiter_q_target},
  };
}

void Nets::save(const std::filesystem::path& path) const {
  numkit::save_checkpoint(path, checkpoint_group());
}

void Nets::load(const std::filesystem::path& path) {
  numkit::load_checkpoint(path, mutable_group());
}

}  // namespace metacure::metaloop
