#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "metacure/agents/actor_critic.hpp"
#include "metacure/numkit/finite_diff.hpp"
#include "metacure/numkit/mlp.hpp"

using metacure::agents::ActionSample;
using metacure::agents::init_policy;
using metacure::agents::init_q;
using metacure::agents::policy_act;
using metacure::agents::policy_forward;
using metacure::agents::policy_sample;
using metacure::agents::PolicyNodes;
using metacure::agents::PolicySpec;
using metacure::agents::polyak_update;
using metacure::agents::q_min_eval;
using metacure::agents::q_min_forward;
using metacure::agents::QSpec;
using metacure::numkit::Array;
using metacure::numkit::compare_gradients;
using metacure::numkit::finite_diff_grad;
using metacure::numkit::Graph;
using metacure::numkit::GraphNode;
using metacure::numkit::mlp_eval;
using metacure::numkit::ParamStore;
using metacure::numkit::Rng;

namespace {

PolicySpec small_policy() {
  PolicySpec spec;
  spec.obs_dim = 3;
  spec.action_dim = 2;
  spec.action_max = 0.1;
  spec.hidden = {8};
  return spec;
}

Array random_obs(std::size_t n, Rng& rng) {
  Array obs({n});
  for (std::size_t i = 0; i < n; ++i) obs[i] = rng.uniform(-1.0, 1.0);
  return obs;
}

}  // namespace

TEST_CASE("policy samples stay inside the action bound") {
  const PolicySpec spec = small_policy();
  ParamStore params;
  Rng rng(41);
  init_policy(params, "pi.", spec, rng);

  for (int i = 0; i < 200; ++i) {
    const Array obs = random_obs(spec.obs_dim, rng);
    const Array a = policy_act(params, "pi.", spec, obs, rng, false);
    REQUIRE(a.size() == spec.action_dim);
    for (std::size_t j = 0; j < a.size(); ++j) {
      CHECK(a[j] < spec.action_max);
      CHECK(a[j] > -spec.action_max);
    }
  }
}

TEST_CASE("deterministic action is the squashed scaled mean") {
  const PolicySpec spec = small_policy();
  ParamStore params;
  Rng rng(42);
  init_policy(params, "pi.", spec, rng);
  const Array obs = random_obs(spec.obs_dim, rng);

  const Array a1 = policy_act(params, "pi.", spec, obs, rng, true);
  const Array a2 = policy_act(params, "pi.", spec, obs, rng, true);
  for (std::size_t j = 0; j < a1.size(); ++j) CHECK(a1[j] == a2[j]);

  const Array head = mlp_eval(params, "pi.", spec.mlp(), obs);
  for (std::size_t j = 0; j < spec.action_dim; ++j)
    CHECK(a1[j] == doctest::Approx(spec.action_max * std::tanh(head[j])).epsilon(1e-15));

  // The graph path with zero noise lands on the same point.
  Graph g;
  Array obs_row({1, spec.obs_dim});
  for (std::size_t j = 0; j < spec.obs_dim; ++j) obs_row.at(0, j) = obs[j];
  const PolicyNodes nodes = policy_forward(g, params, "pi.", spec, g.input(obs_row),
                                           Array({1, spec.action_dim}));
  for (std::size_t j = 0; j < spec.action_dim; ++j)
    CHECK(std::abs(nodes.action->value().at(0, j) - a1[j]) < 1e-14);
}

TEST_CASE("plain and graph policy paths agree on the same noise") {
  const PolicySpec spec = small_policy();
  ParamStore params;
  Rng init_rng(43);
  init_policy(params, "pi.", spec, init_rng);

  const std::size_t b = 4;
  Array obs_rows({b, spec.obs_dim});
  Rng obs_rng(5);
  for (std::size_t i = 0; i < obs_rows.size(); ++i)
    obs_rows[i] = obs_rng.uniform(-1.0, 1.0);

  // Identically seeded sources give the plain path and the frozen noise
  // array the exact same draws, row by row.
  Rng noise_a(99);
  Rng noise_b(99);
  Array eps({b, spec.action_dim});
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = noise_b.normal();

  Graph g;
  const PolicyNodes nodes =
      policy_forward(g, params, "pi.", spec, g.input(obs_rows), eps);
  REQUIRE(nodes.action->value().rows() == b);
  REQUIRE(nodes.log_prob->value().cols() == 1);

  for (std::size_t r = 0; r < b; ++r) {
    Array obs({spec.obs_dim});
    for (std::size_t j = 0; j < spec.obs_dim; ++j) obs[j] = obs_rows.at(r, j);
    const ActionSample s = policy_sample(params, "pi.", spec, obs, noise_a);
    for (std::size_t j = 0; j < spec.action_dim; ++j)
      CHECK(std::abs(nodes.action->value().at(r, j) - s.action[j]) < 1e-12);
    CHECK(std::abs(nodes.log_prob->value().at(r, 0) - s.log_prob) < 1e-12);
  }
}

TEST_CASE("log-std clamping caps the density at the configured bounds") {
  PolicySpec spec = small_policy();
  spec.hidden = {4};
  ParamStore params;
  Rng rng(44);
  init_policy(params, "pi.", spec, rng);

  // Push the raw log-std head far past the upper bound.
  Array& bias = params.value("pi.b1");
  REQUIRE(bias.size() == 2 * spec.action_dim);
  for (std::size_t j = spec.action_dim; j < bias.size(); ++j) bias[j] = 50.0;

  const Array obs = random_obs(spec.obs_dim, rng);
  const Array head = mlp_eval(params, "pi.", spec.mlp(), obs);

  Rng noise_a(7);
  Rng noise_b(7);
  const ActionSample s = policy_sample(params, "pi.", spec, obs, noise_a);

  // Hand-computed density with log-std pinned at the upper bound.
  double expected = 0.0;
  for (std::size_t j = 0; j < spec.action_dim; ++j) {
    const double eps = noise_b.normal();
    const double u = head[j] + std::exp(spec.log_std_max) * eps;
    const double log_1m_tanh_sq =
        2.0 * (std::log(2.0) - u - metacure::numkit::stable_softplus(-2.0 * u));
    expected += -0.5 * eps * eps - 0.5 * std::log(2.0 * 3.14159265358979323846) -
                std::log(spec.action_max) - spec.log_std_max - log_1m_tanh_sq;
  }
  CHECK(s.log_prob == doctest::Approx(expected).epsilon(1e-12));

  // Pinned at the lower bound the noise scale collapses and sampling lands
  // on the deterministic action.
  for (std::size_t j = spec.action_dim; j < bias.size(); ++j) bias[j] = -50.0;
  Rng noise_c(8);
  const ActionSample tight = policy_sample(params, "pi.", spec, obs, noise_c);
  const Array det = policy_act(params, "pi.", spec, obs, noise_c, true);
  for (std::size_t j = 0; j < spec.action_dim; ++j)
    CHECK(std::abs(tight.action[j] - det[j]) < 1e-6);
}

TEST_CASE("policy graph gradients match finite differences") {
  PolicySpec spec;
  spec.obs_dim = 2;
  spec.action_dim = 1;
  spec.action_max = 0.5;
  spec.hidden = {4};

  ParamStore params;
  Rng rng(45);
  init_policy(params, "pi.", spec, rng);

  const std::size_t b = 3;
  Array obs({b, spec.obs_dim});
  for (std::size_t i = 0; i < obs.size(); ++i) obs[i] = rng.uniform(-1.0, 1.0);
  Array eps({b, spec.action_dim});
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = rng.normal();

  const auto build_loss = [&](Graph& g, ParamStore& p) -> GraphNode* {
    const PolicyNodes nodes = policy_forward(g, p, "pi.", spec, g.input(obs), eps);
    return g.add(g.mean_all(nodes.log_prob), g.mean_all(nodes.action));
  };

  {
    Graph g;
    g.backward(build_loss(g, params));
  }
  const auto numeric = finite_diff_grad(
      [&](ParamStore& p) {
        Graph g;
        return build_loss(g, p)->value()[0];
      },
      params);
  const auto cmp = compare_gradients(params, numeric);
  CHECK(cmp.max_rel < 1e-6);
  params.zero_grads();
}

TEST_CASE("twin value nets take the elementwise minimum") {
  QSpec spec;
  spec.obs_dim = 3;
  spec.action_dim = 2;
  spec.hidden = {8};
  REQUIRE(spec.net_prefixes().size() == 2);

  ParamStore params;
  Rng rng(46);
  init_q(params, spec, rng);

  Array row({spec.obs_dim + spec.action_dim});
  for (std::size_t i = 0; i < row.size(); ++i) row[i] = rng.uniform(-1.0, 1.0);

  const double q1 = mlp_eval(params, "q1.", spec.mlp(), row)[0];
  const double q2 = mlp_eval(params, "q2.", spec.mlp(), row)[0];
  CHECK(q_min_eval(params, spec, row) == std::min(q1, q2));

  // Graph and plain paths agree over a batch.
  const std::size_t b = 5;
  Array rows({b, row.size()});
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = rng.uniform(-1.0, 1.0);
  Graph g;
  GraphNode* qn = q_min_forward(g, params, spec, g.input(rows));
  REQUIRE(qn->value().rows() == b);
  for (std::size_t r = 0; r < b; ++r) {
    Array one({row.size()});
    for (std::size_t c = 0; c < one.size(); ++c) one[c] = rows.at(r, c);
    CHECK(std::abs(qn->value().at(r, 0) - q_min_eval(params, spec, one)) < 1e-12);
  }

  QSpec single = spec;
  single.twin = false;
  REQUIRE(single.net_prefixes().size() == 1);
  CHECK(q_min_eval(params, single, row) == q1);
}

TEST_CASE("value-net graph gradients match finite differences") {
  QSpec spec;
  spec.obs_dim = 2;
  spec.action_dim = 1;
  spec.hidden = {4};

  ParamStore params;
  Rng rng(47);
  init_q(params, spec, rng);

  const std::size_t b = 3;
  Array rows({b, spec.obs_dim + spec.action_dim});
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = rng.uniform(-1.0, 1.0);

  const auto build_loss = [&](Graph& g, ParamStore& p) -> GraphNode* {
    return g.mean_all(q_min_forward(g, p, spec, g.input(rows)));
  };
  {
    Graph g;
    g.backward(build_loss(g, params));
  }
  const auto numeric = finite_diff_grad(
      [&](ParamStore& p) {
        Graph g;
        return build_loss(g, p)->value()[0];
      },
      params);
  CHECK(compare_gradients(params, numeric).max_rel < 1e-6);
  params.zero_grads();
}

TEST_CASE("target blend mixes parameters exactly") {
  ParamStore src;
  ParamStore dst;
  src.add("w", Array::from({1.0, 2.0, 3.0}));
  dst.add("w", Array::from({5.0, 6.0, 7.0}));

  polyak_update(src, dst, 0.25);
  CHECK(dst.value("w")[0] == doctest::Approx(0.75 * 5.0 + 0.25 * 1.0).epsilon(1e-15));
  CHECK(dst.value("w")[1] == doctest::Approx(0.75 * 6.0 + 0.25 * 2.0).epsilon(1e-15));
  CHECK(dst.value("w")[2] == doctest::Approx(0.75 * 7.0 + 0.25 * 3.0).epsilon(1e-15));

  polyak_update(src, dst, 1.0);  // full copy
  for (std::size_t i = 0; i < 3; ++i) CHECK(dst.value("w")[i] == src.value("w")[i]);

  CHECK_THROWS_AS(polyak_update(src, dst, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(polyak_update(src, dst, 1.5), std::invalid_argument);

  ParamStore bad;
  bad.add("w", Array::from({1.0}));
  CHECK_THROWS_AS(polyak_update(src, bad, 0.5), std::invalid_argument);
}

TEST_CASE("actor-critic specs reject malformed configurations") {
  PolicySpec p;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = small_policy();
  p.action_max = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = small_policy();
  p.log_std_min = 3.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  QSpec q;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);

  const PolicySpec spec = small_policy();
  ParamStore params;
  Rng rng(48);
  init_policy(params, "pi.", spec, rng);
  CHECK_THROWS_AS(policy_act(params, "pi.", spec, Array({2}), rng, false),
                  std::invalid_argument);
  Graph g;
  Array obs({1, spec.obs_dim});
  CHECK_THROWS_AS(
      policy_forward(g, params, "pi.", spec, g.input(obs), Array({2, 1})),
      std::invalid_argument);
}
