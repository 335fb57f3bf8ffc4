#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "metacure/inference/encoder.hpp"
#include "metacure/numkit/array.hpp"
#include "metacure/numkit/graph.hpp"
#include "metacure/numkit/mlp.hpp"
#include "metacure/numkit/params.hpp"
#include "metacure/numkit/rng.hpp"

namespace metacure::curiosity {

// Outcome predictor: maps (conditioner, state, action) to (reward, next
// state). The conditioner is either a belief vector over the latent task
// (mean and log variance) or the true task identification vector; comparing
// the two predictors' errors localizes where task information is missing.
struct PredictorSpec {
  std::size_t cond_dim = 0;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::vector<std::size_t> hidden = {64, 64};

  numkit::MlpSpec mlp() const;  // cond+state+action -> hidden -> 1+state_dim
  void validate() const;
};

void init_predictor(numkit::ParamStore& params, const std::string& prefix,
                    const PredictorSpec& spec, numkit::Rng& rng);

// Plain path: one prediction, no gradients. Returns [1 + state_dim]:
// predicted reward followed by the predicted next state.
numkit::Array predict_outcome(const numkit::ParamStore& params,
                              const std::string& prefix, const PredictorSpec& spec,
                              const numkit::Array& cond, const numkit::Array& s,
                              const numkit::Array& a);

// Squared error of a prediction against the realized reward and next state.
double outcome_sq_error(const numkit::Array& prediction, double r,
                        const numkit::Array& s2);

// --- Batched training loss (graph path) ---

struct PredictorBatch {
  // Context prefixes for the belief-conditioned predictor: N transition rows
  // grouped into B segments. An element whose prefix is empty gets the prior.
  numkit::Array context_rows;
  std::vector<std::size_t> offsets;  // B + 1 entries
  numkit::Array sa_rows;             // [B, state_dim + action_dim]
  numkit::Array kappa_rows;          // [B, cond dim of the task predictor]
  numkit::Array targets;             // [B, 1 + state_dim]: reward, next state
};

struct PredictorLossNodes {
  numkit::GraphNode* total = nullptr;  // meta + task, the node to backprop
  numkit::GraphNode* meta = nullptr;   // mean belief-conditioned loss
  numkit::GraphNode* task = nullptr;   // mean task-conditioned loss
  // Re-encoded posteriors, one row per element; only set by the re-encoding
  // overload, so callers there can add a divergence penalty on the encoder.
  inference::PosteriorNodes beliefs;
};

// Builds both predictors' mean squared losses on one batch. Belief vectors
// are re-encoded from each element's context prefix under the current
// encoder parameters, so the encoder is shaped by prediction error too.
PredictorLossNodes predictor_training_loss(
    numkit::Graph& g, numkit::ParamStore& enc_params, const std::string& enc_prefix,
    const inference::EncoderSpec& enc_spec, numkit::ParamStore& meta_params,
    const std::string& meta_prefix, const PredictorSpec& meta_spec,
    numkit::ParamStore& task_params, const std::string& task_prefix,
    const PredictorSpec& task_spec, const PredictorBatch& batch);

// Same losses with the belief conditioners given as fixed rows — the belief
// each element's agent held when it acted — instead of re-encoded context.
// Only the two predictors receive gradients, which keeps a training step
// independent of context length.
struct RecordedBatch {
  numkit::Array belief_rows;  // [B, cond dim of the belief predictor]
  numkit::Array sa_rows;      // [B, state_dim + action_dim]
  numkit::Array kappa_rows;   // [B, cond dim of the task predictor]
  numkit::Array targets;      // [B, 1 + state_dim]: reward, next state
};

PredictorLossNodes predictor_training_loss(
    numkit::Graph& g, numkit::ParamStore& meta_params, const std::string& meta_prefix,
    const PredictorSpec& meta_spec, numkit::ParamStore& task_params,
    const std::string& task_prefix, const PredictorSpec& task_spec,
    const RecordedBatch& batch);

// --- Intrinsic reward ---

// Prediction-gap reward: how much worse the belief-conditioned predictor
// explains an outcome than the task-conditioned one. Counts every call so
// ablations can prove they never consulted it.
class IntrinsicRewarder {
 public:
  IntrinsicRewarder(PredictorSpec meta_spec, PredictorSpec task_spec, double lambda);

  double intrinsic_reward(const numkit::ParamStore& meta_params,
                          const std::string& meta_prefix,
                          const numkit::ParamStore& task_params,
                          const std::string& task_prefix, const numkit::Array& belief,
                          const numkit::Array& kappa, const numkit::Array& s,
                          const numkit::Array& a, double r, const numkit::Array& s2);

  // Reward the explorer trains on: the gap plus lambda times the external
  // reward.
  double exploration_reward(double intrinsic, double external) const;

  double lambda() const { return lambda_; }
  std::size_t intrinsic_calls() const { return intrinsic_calls_; }

 private:
  PredictorSpec meta_spec_;
  PredictorSpec task_spec_;
  double lambda_;
  std::size_t intrinsic_calls_ = 0;
};

}  // namespace metacure::curiosity
