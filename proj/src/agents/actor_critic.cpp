#include "metacure/agents/actor_critic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metacure::agents {

using numkit::Array;
using numkit::Graph;
using numkit::GraphNode;
using numkit::MlpSpec;
using numkit::ParamStore;
using numkit::Rng;

namespace {

constexpr double kLn2Pi = 1.8378770664093453;  // log(2 * pi)

}  // namespace

MlpSpec PolicySpec::mlp() const {
  MlpSpec m;
  m.input = obs_dim;
  m.hidden = hidden;
  m.output = 2 * action_dim;
  return m;
}

void PolicySpec::validate() const {
  if (obs_dim == 0 || action_dim == 0)
    throw std::invalid_argument("PolicySpec: zero dimensions");
  if (!(action_max > 0.0))
    throw std::invalid_argument("PolicySpec: action bound must be positive");
  if (!(log_std_min < log_std_max))
    throw std::invalid_argument("PolicySpec: log-std bounds out of order");
  mlp().validate();
}

void init_policy(ParamStore& params, const std::string& prefix, const PolicySpec& spec,
                 Rng& rng) {
  spec.validate();
  numkit::init_mlp(params, prefix, spec.mlp(), rng);
}

namespace {

struct PlainPolicyOut {
  Array action;
  double log_prob;
};

// Shared by both plain entry points so sampling and density use identical
// arithmetic to the graph path.
PlainPolicyOut plain_policy(const ParamStore& params, const std::string& prefix,
                            const PolicySpec& spec, const Array& obs, Rng* rng,
                            bool deterministic) {
  if (obs.size() != spec.obs_dim)
    throw std::invalid_argument("policy: observation width mismatch");
  const Array out = numkit::mlp_eval(params, prefix, spec.mlp(), obs);
  const std::size_t n = spec.action_dim;
  Array action({n});
  double log_prob = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = out[i];
    if (deterministic) {
      action[i] = spec.action_max * std::tanh(mean);
      continue;
    }
    const double log_std = std::clamp(out[n + i], spec.log_std_min, spec.log_std_max);
    const double std_dev = std::exp(log_std);
    const double eps = rng->normal();
    const double u = mean + std_dev * eps;
    action[i] = spec.action_max * std::tanh(u);
    const double log_1m_tanh_sq =
        2.0 * (std::log(2.0) - u - numkit::stable_softplus(-2.0 * u));
    log_prob += -0.5 * eps * eps - 0.5 * kLn2Pi - std::log(spec.action_max) -
                log_std - log_1m_tanh_sq;
  }
  return {std::move(action), log_prob};
}

}  // namespace

Array policy_act(const ParamStore& params, const std::string& prefix,
                 const PolicySpec& spec, const Array& obs, Rng& rng,
                 bool deterministic) {
  return plain_policy(params, prefix, spec, obs, &rng, deterministic).action;
}

ActionSample policy_sample(const ParamStore& params, const std::string& prefix,
                           const PolicySpec& spec, const Array& obs, Rng& rng) {
  PlainPolicyOut out = plain_policy(params, prefix, spec, obs, &rng, false);
  return {std::move(out.action), out.log_prob};
}

PolicyNodes policy_forward(Graph& g, ParamStore& params, const std::string& prefix,
                           const PolicySpec& spec, GraphNode* obs, const Array& eps) {
  spec.validate();
  const std::size_t n = spec.action_dim;
  if (eps.cols() != n || eps.rows() != obs->value().rows())
    throw std::invalid_argument("policy_forward: noise shape mismatch");

  GraphNode* out = numkit::mlp_forward(g, params, prefix, spec.mlp(), obs);
  GraphNode* mean = g.slice_cols(out, 0, n);
  GraphNode* log_std =
      g.clamp(g.slice_cols(out, n, 2 * n), spec.log_std_min, spec.log_std_max);
  GraphNode* std_dev = g.exp_of(log_std);
  GraphNode* eps_n = g.input(eps);
  GraphNode* u = g.add(mean, g.mul(std_dev, eps_n));

  PolicyNodes nodes;
  nodes.action = g.affine(g.tanh_of(u), spec.action_max, 0.0);

  // log(1 - tanh(u)^2) = 2 * (log 2 - u - softplus(-2u)).
  GraphNode* log_1m_tanh_sq = g.affine(
      g.sub(g.affine(u, -1.0, std::log(2.0)), g.softplus(g.affine(u, -2.0, 0.0))),
      2.0, 0.0);
  GraphNode* base = g.affine(g.square(eps_n), -0.5,
                             -0.5 * kLn2Pi - std::log(spec.action_max));
  nodes.log_prob = g.sum_cols(g.sub(g.sub(base, log_std), log_1m_tanh_sq));
  return nodes;
}

MlpSpec QSpec::mlp() const {
  MlpSpec m;
  m.input = obs_dim + action_dim;
  m.hidden = hidden;
  m.output = 1;
  return m;
}

void QSpec::validate() const {
  if (obs_dim == 0 || action_dim == 0)
    throw std::invalid_argument("QSpec: zero dimensions");
  mlp().validate();
}

std::vector<std::string> QSpec::net_prefixes() const {
  return twin ? std::vector<std::string>{"q1.", "q2."}
              : std::vector<std::string>{"q1."};
}

void init_q(ParamStore& params, const QSpec& spec, Rng& rng) {
  spec.validate();
  for (const std::string& prefix : spec.net_prefixes())
    numkit::init_mlp(params, prefix, spec.mlp(), rng);
}

GraphNode* q_min_forward(Graph& g, ParamStore& params, const QSpec& spec,
                         GraphNode* obs_actions) {
  GraphNode* q = nullptr;
  for (const std::string& prefix : spec.net_prefixes()) {
    GraphNode* qi = numkit::mlp_forward(g, params, prefix, spec.mlp(), obs_actions);
    q = q == nullptr ? qi : g.min_elem(q, qi);
  }
  return q;
}

double q_min_eval(const ParamStore& params, const QSpec& spec,
                  const Array& obs_action_row) {
  double q = 0.0;
  bool first = true;
  for (const std::string& prefix : spec.net_prefixes()) {
    const Array qi = numkit::mlp_eval(params, prefix, spec.mlp(), obs_action_row);
    q = first ? qi[0] : std::min(q, qi[0]);
    first = false;
  }
  return q;
}

void polyak_update(const ParamStore& src, ParamStore& dst, double tau) {
  if (!(tau > 0.0 && tau <= 1.0))
    throw std::invalid_argument("polyak_update: tau must be in (0, 1]");
  for (const std::string& name : src.names()) {
    const Array& from = src.value(name);
    Array& to = dst.value(name);
    if (!from.same_shape(to))
      throw std::invalid_argument("polyak_update: shape mismatch for " + name);
    for (std::size_t i = 0; i < to.size(); ++i)
      to[i] = (1.0 - tau) * to[i] + tau * from[i];
  }
}

}  // namespace metacure::agents
