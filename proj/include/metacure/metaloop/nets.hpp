#pragma once

#include <filesystem>

#include "metacure/agents/actor_critic.hpp"
#include "metacure/curiosity/predictors.hpp"
#include "metacure/envkit/task.hpp"
#include "metacure/inference/encoder.hpp"
#include "metacure/metaloop/config.hpp"
#include "metacure/numkit/checkpoint.hpp"
#include "metacure/numkit/params.hpp"
#include "metacure/numkit/rng.hpp"

namespace metacure::metaloop {

// Every learnable store of one run, with the specs that shape them. The
// exploration policy observes the state joined with the belief vector
// (2z entries); the exploitation policy observes the state joined with a
// latent sample (z entries).
struct Nets {
  Nets(const TrainConfig& cfg, const envkit::Env& probe, std::size_t kappa_dim,
       numkit::Rng& rng);

  inference::EncoderSpec encoder_spec;
  curiosity::PredictorSpec meta_spec;
  curiosity::PredictorSpec task_spec;
  agents::PolicySpec explorer_spec;
  agents::PolicySpec exploiter_spec;
  agents::QSpec explorer_q_spec;
  agents::QSpec exploiter_q_spec;

  numkit::ParamStore encoder;    // the latent-inference encoder, always trained
  numkit::ParamStore encoder_b;  // belief-side twin; filled only when split
  numkit::ParamStore meta_pred;
  numkit::ParamStore task_pred;
  numkit::ParamStore explorer;
  numkit::ParamStore explorer_q;
  numkit::ParamStore explorer_q_target;
  numkit::ParamStore exploiter;
  numkit::ParamStore exploiter_q;
  numkit::ParamStore exploiter_q_target;

  bool split_encoders = false;

  // The store whose beliefs condition the exploration policy, the recorded
  // snapshots, and the belief-conditioned predictor.
  numkit::ParamStore& belief_encoder() { return split_encoders ? encoder_b : encoder; }
  const numkit::ParamStore& belief_encoder() const {
    return split_encoders ? encoder_b : encoder;
  }
  // The store whose posterior the exploitation policy samples its latent from.
  numkit::ParamStore& latent_encoder() { return encoder; }
  const numkit::ParamStore& latent_encoder() const { return encoder; }

  numkit::StoreGroup checkpoint_group() const;
  numkit::MutableStoreGroup mutable_group();
  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);
};

}  // namespace metacure::metaloop
