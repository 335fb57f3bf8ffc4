#include "metacure/agents/sac.hpp"

#include <cmath>
#include <stdexcept>

namespace metacure::agents {

using numkit::Array;
using numkit::Graph;
using numkit::GraphNode;
using numkit::ParamStore;
using numkit::Rng;

namespace {

Array hstack(const Array& a, const Array& b) {
  if (a.rows() != b.rows())
    throw std::invalid_argument("hstack: row counts differ");
  Array out({a.rows(), a.cols() + b.cols()});
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) out.at(r, c) = a.at(r, c);
    for (std::size_t c = 0; c < b.cols(); ++c) out.at(r, a.cols() + c) = b.at(r, c);
  }
  return out;
}

Array row_of(const Array& m, std::size_t r) {
  Array row({m.cols()});
  for (std::size_t c = 0; c < m.cols(); ++c) row[c] = m.at(r, c);
  return row;
}

Array draw_noise(std::size_t rows, std::size_t cols, Rng& rng) {
  Array eps({rows, cols});
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = rng.normal();
  return eps;
}

void check_batch_shapes(const char* who, std::size_t b, const Array& actions,
                        const Array& rewards, const Array& not_done) {
  if (actions.rows() != b || rewards.size() != b || not_done.size() != b)
    throw std::invalid_argument(std::string(who) + ": batch row counts differ");
}

double mean_min_q(const ParamStore& q, const QSpec& spec, const Array& obs,
                  const Array& actions) {
  const Array oa = hstack(obs, actions);
  double sum = 0.0;
  for (std::size_t r = 0; r < oa.rows(); ++r)
    sum += q_min_eval(q, spec, row_of(oa, r));
  return sum / static_cast<double>(oa.rows());
}

}  // namespace

Array td_targets(const ActorCriticRefs& nets, const SacBatch& batch,
                 const SacHyper& hyper, Rng& rng) {
  const std::size_t b = batch.obs.rows();
  check_batch_shapes("td_targets", b, batch.actions, batch.rewards, batch.not_done);
  Array y({b, 1});
  for (std::size_t i = 0; i < b; ++i) {
    const Array obs2 = row_of(batch.obs2, i);
    const ActionSample next = policy_sample(*nets.policy, nets.policy_prefix,
                                            nets.policy_spec, obs2, rng);
    const double q_next =
        q_min_eval(*nets.q_target, nets.q_spec, hstack(obs2, next.action));
    y.at(i, 0) = batch.rewards[i] +
                 hyper.gamma * batch.not_done[i] *
                     (q_next - hyper.alpha * next.log_prob);
  }
  return y;
}

GraphNode* critic_loss_graph(Graph& g, ParamStore& q, const QSpec& spec,
                             GraphNode* obs_actions, const Array& y) {
  GraphNode* target = g.input(y);
  GraphNode* loss = nullptr;
  for (const std::string& prefix : spec.net_prefixes()) {
    GraphNode* qi = numkit::mlp_forward(g, q, prefix, spec.mlp(), obs_actions);
    GraphNode* err = g.mean_all(g.square(g.sub(qi, target)));
    loss = loss == nullptr ? err : g.add(loss, err);
  }
  return loss;
}

GraphNode* policy_loss_graph(Graph& g, ParamStore& policy,
                             const std::string& policy_prefix,
                             const PolicySpec& policy_spec, ParamStore& q,
                             const QSpec& q_spec, GraphNode* obs, const Array& eps,
                             double alpha) {
  const PolicyNodes pi = policy_forward(g, policy, policy_prefix, policy_spec, obs, eps);
  GraphNode* q_min = q_min_forward(g, q, q_spec, g.concat_cols(obs, pi.action));
  return g.mean_all(g.sub(g.affine(pi.log_prob, alpha, 0.0), q_min));
}

SacStats sac_update(ActorCriticRefs& nets, const SacBatch& batch,
                    const SacHyper& hyper, Rng& rng) {
  const std::size_t b = batch.obs.rows();
  check_batch_shapes("sac_update", b, batch.actions, batch.rewards, batch.not_done);
  SacStats stats;

  const Array y = td_targets(nets, batch, hyper, rng);
  {
    Graph g;
    GraphNode* oa = g.input(hstack(batch.obs, batch.actions));
    GraphNode* loss = critic_loss_graph(g, *nets.q, nets.q_spec, oa, y);
    stats.critic_loss = loss->value()[0];
    g.backward(loss);
    numkit::adam_step(*nets.q, hyper.lr);
  }
  {
    Graph g;
    GraphNode* obs = g.input(batch.obs);
    const Array eps = draw_noise(b, nets.policy_spec.action_dim, rng);
    GraphNode* loss = policy_loss_graph(g, *nets.policy, nets.policy_prefix,
                                        nets.policy_spec, *nets.q, nets.q_spec, obs,
                                        eps, hyper.alpha);
    stats.policy_loss = loss->value()[0];
    g.backward(loss);
    numkit::adam_step(*nets.policy, hyper.lr);
    // The value nets feed the policy objective but only the policy moves here.
    nets.q->zero_grads();
  }
  polyak_update(*nets.q, *nets.q_target, hyper.tau);
  stats.mean_q = mean_min_q(*nets.q, nets.q_spec, batch.obs, batch.actions);
  return stats;
}

SacStats sac_update_latent(LatentActorCriticRefs& nets, const LatentBatch& batch,
                           const SacHyper& hyper, Rng& rng) {
  const std::size_t b = batch.states.rows();
  check_batch_shapes("sac_update_latent", b, batch.actions, batch.rewards,
                     batch.not_done);
  const std::size_t z = nets.encoder_spec.z_dim;
  SacStats stats;

  // One latent draw serves the whole batch; its value is reused with
  // gradients stopped wherever the graph must not reach the encoder.
  const Array eps_z = draw_noise(1, z, rng);

  // Plain-path belief over the context, for the detached latent value.
  const std::size_t n_ctx =
      batch.context_rows.size() == 0 ? 0 : batch.context_rows.rows();
  inference::BeliefState belief(*nets.encoder, nets.encoder_prefix,
                                nets.encoder_spec);
  for (std::size_t r = 0; r < n_ctx; ++r)
    belief.update(row_of(batch.context_rows, r));
  Array z_bar({1, z});
  for (std::size_t i = 0; i < z; ++i)
    z_bar.at(0, i) =
        belief.mean()[i] + std::sqrt(belief.variance()[i]) * eps_z.at(0, i);
  Array z_rows({b, z});
  for (std::size_t r = 0; r < b; ++r)
    for (std::size_t c = 0; c < z; ++c) z_rows.at(r, c) = z_bar.at(0, c);

  const Array obs = hstack(batch.states, z_rows);
  const Array obs2 = hstack(batch.states2, z_rows);

  SacBatch flat;
  flat.obs = obs;
  flat.actions = batch.actions;
  flat.rewards = batch.rewards;
  flat.obs2 = obs2;
  flat.not_done = batch.not_done;
  const Array y = td_targets(nets.ac, flat, hyper, rng);

  {
    Graph g;
    const inference::PosteriorNodes post = inference::encode_segments(
        g, *nets.encoder, nets.encoder_prefix, nets.encoder_spec,
        batch.context_rows, {0, n_ctx});
    GraphNode* z_node = inference::sample_z_graph(g, post, g.input(eps_z));
    GraphNode* z_rep = g.repeat_row(z_node, b);
    GraphNode* oa =
        g.concat_cols(g.concat_cols(g.input(batch.states), z_rep), g.input(batch.actions));
    GraphNode* td = critic_loss_graph(g, *nets.ac.q, nets.ac.q_spec, oa, y);
    GraphNode* kl =
        g.mean_all(inference::kl_to_prior_graph(g, post.mean, post.var));
    stats.kl = kl->value()[0];
    GraphNode* loss = g.add(td, g.affine(kl, hyper.beta_kl, 0.0));
    stats.critic_loss = loss->value()[0];
    g.backward(loss);
    numkit::adam_step(*nets.ac.q, hyper.lr);
    numkit::adam_step(*nets.encoder, hyper.lr);
  }
  {
    Graph g;
    GraphNode* obs_n = g.input(obs);
    const Array eps = draw_noise(b, nets.ac.policy_spec.action_dim, rng);
    GraphNode* loss =
        policy_loss_graph(g, *nets.ac.policy, nets.ac.policy_prefix,
                          nets.ac.policy_spec, *nets.ac.q, nets.ac.q_spec, obs_n, eps,
                          hyper.alpha);
    stats.policy_loss = loss->value()[0];
    g.backward(loss);
    numkit::adam_step(*nets.ac.policy, hyper.lr);
    nets.ac.q->zero_grads();
  }
  polyak_update(*nets.ac.q, *nets.ac.q_target, hyper.tau);
  stats.mean_q = mean_min_q(*nets.ac.q, nets.ac.q_spec, obs, batch.actions);
  return stats;
}

}  // namespace metacure::agents
