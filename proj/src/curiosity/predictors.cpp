#include "metacure/curiosity/predictors.hpp"

#include <stdexcept>
#include <utility>

namespace metacure::curiosity {

using numkit::Array;
using numkit::Graph;
using numkit::GraphNode;
using numkit::MlpSpec;
using numkit::ParamStore;
using numkit::Rng;

MlpSpec PredictorSpec::mlp() const {
  MlpSpec m;
  m.input = cond_dim + state_dim + action_dim;
  m.hidden = hidden;
  m.output = 1 + state_dim;
  return m;
}

void PredictorSpec::validate() const {
  if (cond_dim == 0 || state_dim == 0 || action_dim == 0)
    throw std::invalid_argument("PredictorSpec: zero dimensions");
  mlp().validate();
}

void init_predictor(ParamStore& params, const std::string& prefix,
                    const PredictorSpec& spec, Rng& rng) {
  spec.validate();
  numkit::init_mlp(params, prefix, spec.mlp(), rng);
}

Array predict_outcome(const ParamStore& params, const std::string& prefix,
                      const PredictorSpec& spec, const Array& cond, const Array& s,
                      const Array& a) {
  if (cond.size() != spec.cond_dim || s.size() != spec.state_dim ||
      a.size() != spec.action_dim)
    throw std::invalid_argument("predict_outcome: input widths do not match spec");
  Array row({spec.cond_dim + spec.state_dim + spec.action_dim});
  std::size_t j = 0;
  for (std::size_t i = 0; i < cond.size(); ++i) row[j++] = cond[i];
  for (std::size_t i = 0; i < s.size(); ++i) row[j++] = s[i];
  for (std::size_t i = 0; i < a.size(); ++i) row[j++] = a[i];
  return numkit::mlp_eval(params, prefix, spec.mlp(), row);
}

double outcome_sq_error(const Array& prediction, double r, const Array& s2) {
  if (prediction.size() != 1 + s2.size())
    throw std::invalid_argument("outcome_sq_error: prediction width mismatch");
  const double dr = prediction[0] - r;
  double err = dr * dr;
  for (std::size_t i = 0; i < s2.size(); ++i) {
    const double d = prediction[1 + i] - s2[i];
    err += d * d;
  }
  return err;
}

PredictorLossNodes predictor_training_loss(
    Graph& g, ParamStore& enc_params, const std::string& enc_prefix,
    const inference::EncoderSpec& enc_spec, ParamStore& meta_params,
    const std::string& meta_prefix, const PredictorSpec& meta_spec,
    ParamStore& task_params, const std::string& task_prefix,
    const PredictorSpec& task_spec, const PredictorBatch& batch) {
  meta_spec.validate();
  task_spec.validate();
  if (meta_spec.cond_dim != 2 * enc_spec.z_dim)
    throw std::invalid_argument(
        "predictor_training_loss: belief predictor conditioner width must be "
        "twice the latent dimension");
  const std::size_t b = batch.offsets.size() - 1;
  if (batch.sa_rows.rows() != b || batch.kappa_rows.rows() != b ||
      batch.targets.rows() != b)
    throw std::invalid_argument("predictor_training_loss: batch row counts differ");
  if (batch.sa_rows.cols() != meta_spec.state_dim + meta_spec.action_dim)
    throw std::invalid_argument("predictor_training_loss: state/action width mismatch");
  if (batch.targets.cols() != 1 + meta_spec.state_dim)
    throw std::invalid_argument("predictor_training_loss: target width mismatch");
  if (batch.kappa_rows.cols() != task_spec.cond_dim)
    throw std::invalid_argument("predictor_training_loss: task vector width mismatch");

  const inference::PosteriorNodes post = inference::encode_segments(
      g, enc_params, enc_prefix, enc_spec, batch.context_rows, batch.offsets);
  GraphNode* beliefs = g.concat_cols(post.mean, g.log_of(post.var));  // [B, 2z]

  GraphNode* sa = g.input(batch.sa_rows);
  GraphNode* targets = g.input(batch.targets);

  GraphNode* meta_pred = numkit::mlp_forward(g, meta_params, meta_prefix,
                                             meta_spec.mlp(), g.concat_cols(beliefs, sa));
  GraphNode* task_pred = numkit::mlp_forward(
      g, task_params, task_prefix, task_spec.mlp(),
      g.concat_cols(g.input(batch.kappa_rows), sa));

  PredictorLossNodes out;
  out.meta = g.mean_all(g.sum_cols(g.square(g.sub(meta_pred, targets))));
  out.task = g.mean_all(g.sum_cols(g.square(g.sub(task_pred, targets))));
  out.total = g.add(out.meta, out.task);
  out.beliefs = post;
  return out;
}

PredictorLossNodes predictor_training_loss(
    Graph& g, ParamStore& meta_params, const std::string& meta_prefix,
    const PredictorSpec& meta_spec, ParamStore& task_params,
    const std::string& task_prefix, const PredictorSpec& task_spec,
    const RecordedBatch& batch) {
  meta_spec.validate();
  task_spec.validate();
  const std::size_t b = batch.belief_rows.rows();
  if (batch.sa_rows.rows() != b || batch.kappa_rows.rows() != b ||
      batch.targets.rows() != b)
    throw std::invalid_argument("predictor_training_loss: batch row counts differ");
  if (batch.belief_rows.cols() != meta_spec.cond_dim)
    throw std::invalid_argument("predictor_training_loss: belief width mismatch");
  if (batch.sa_rows.cols() != meta_spec.state_dim + meta_spec.action_dim)
    throw std::invalid_argument("predictor_training_loss: state/action width mismatch");
  if (batch.targets.cols() != 1 + meta_spec.state_dim)
    throw std::invalid_argument("predictor_training_loss: target width mismatch");
  if (batch.kappa_rows.cols() != task_spec.cond_dim)
    throw std::invalid_argument("predictor_training_loss: task vector width mismatch");

  GraphNode* sa = g.input(batch.sa_rows);
  GraphNode* targets = g.input(batch.targets);

  GraphNode* meta_pred =
      numkit::mlp_forward(g, meta_params, meta_prefix, meta_spec.mlp(),
                          g.concat_cols(g.input(batch.belief_rows), sa));
  GraphNode* task_pred = numkit::mlp_forward(
      g, task_params, task_prefix, task_spec.mlp(),
      g.concat_cols(g.input(batch.kappa_rows), sa));

  PredictorLossNodes out;
  out.meta = g.mean_all(g.sum_cols(g.square(g.sub(meta_pred, targets))));
  out.task = g.mean_all(g.sum_cols(g.square(g.sub(task_pred, targets))));
  out.total = g.add(out.meta, out.task);
  return out;
}

IntrinsicRewarder::IntrinsicRewarder(PredictorSpec meta_spec, PredictorSpec task_spec,
                                     double lambda)
    : meta_spec_(std::move(meta_spec)),
      task_spec_(std::move(task_spec)),
      lambda_(lambda) {
  meta_spec_.validate();
  task_spec_.validate();
  if (meta_spec_.state_dim != task_spec_.state_dim ||
      meta_spec_.action_dim != task_spec_.action_dim)
    throw std::invalid_argument(
        "IntrinsicRewarder: predictors must share state and action widths");
  if (lambda_ < 0.0)
    throw std::invalid_argument("IntrinsicRewarder: lambda must be non-negative");
}

double IntrinsicRewarder::intrinsic_reward(
    const ParamStore& meta_params, const std::string& meta_prefix,
    const ParamStore& task_params, const std::string& task_prefix,
    const Array& belief, const Array& kappa, const Array& s, const Array& a, double r,
    const Array& s2) {
  ++intrinsic_calls_;
  const Array meta_pred =
      predict_outcome(meta_params, meta_prefix, meta_spec_, belief, s, a);
  const Array task_pred =
      predict_outcome(task_params, task_prefix, task_spec_, kappa, s, a);
  return outcome_sq_error(meta_pred, r, s2) - outcome_sq_error(task_pred, r, s2);
}

double IntrinsicRewarder::exploration_reward(double intrinsic, double external) const {
  return intrinsic + lambda_ * external;
}

}  // namespace metacure::curiosity
