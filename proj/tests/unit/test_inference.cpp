#include <doctest.h>

#include <cmath>
#include <vector>

#include "metacure/inference/encoder.hpp"
#include "metacure/numkit/finite_diff.hpp"

using metacure::inference::BeliefState;
using metacure::inference::encode_segments;
using metacure::inference::EncoderSpec;
using metacure::inference::init_encoder;
using metacure::inference::kl_to_prior;
using metacure::inference::kl_to_prior_graph;
using metacure::inference::pack_transition;
using metacure::inference::PosteriorNodes;
using metacure::inference::sample_z_graph;
using metacure::numkit::Array;
using metacure::numkit::Graph;
using metacure::numkit::GraphNode;
using metacure::numkit::ParamStore;
using metacure::numkit::Rng;
using metacure::numkit::stable_softplus;

namespace {

EncoderSpec tiny_spec() {
  EncoderSpec spec;
  spec.transition_dim = 3;
  spec.z_dim = 2;
  spec.hidden = {4};
  return spec;
}

Array random_row(Rng& rng, std::size_t n) {
  Array r({n});
  for (std::size_t i = 0; i < n; ++i) r[i] = rng.uniform(-1.0, 1.0);
  return r;
}

}  // namespace

TEST_CASE("transitions pack as (state, action, reward, next state)") {
  const Array row = pack_transition(Array::from({1.0, 2.0}), Array::from({3.0}), 4.0,
                                    Array::from({5.0, 6.0}));
  REQUIRE(row.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(row[i] == static_cast<double>(i + 1));
  CHECK_THROWS_AS(
      pack_transition(Array::from({1.0}), Array::from({1.0}), 0.0,
                      Array::from({1.0, 2.0})),
      std::invalid_argument);
}

TEST_CASE("fresh beliefs are the prior and map to the zero vector") {
  ParamStore ps;
  Rng rng(1);
  const EncoderSpec spec = tiny_spec();
  init_encoder(ps, "enc.", spec, rng);
  const BeliefState belief(ps, "enc.", spec);

  CHECK(belief.transitions_seen() == 0);
  for (double m : belief.mean()) CHECK(m == 0.0);
  for (double v : belief.variance()) CHECK(v == 1.0);
  const Array b = belief.belief_vector();
  REQUIRE(b.size() == 4);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(b[i] == 0.0);
}

TEST_CASE("a zero-weight encoder emits the known constant factor") {
  ParamStore ps;
  Rng rng(1);
  const EncoderSpec spec = tiny_spec();
  init_encoder(ps, "enc.", spec, rng);
  ps.for_each([](const std::string&, metacure::numkit::ParamStore::Entry& e) {
    e.value.fill(0.0);
  });

  BeliefState belief(ps, "enc.", spec);
  belief.update(Array::from({0.3, -0.2, 0.9}));

  // Zero net: factor mean 0, factor variance softplus(0) + floor.
  const double fv = stable_softplus(0.0) + spec.var_floor;
  const double expect_var = 1.0 / (1.0 + 1.0 / fv);
  for (double m : belief.mean()) CHECK(m == 0.0);
  for (double v : belief.variance())
    CHECK(v == doctest::Approx(expect_var).epsilon(1e-14));
}

TEST_CASE("incremental, hand-combined, and graph paths agree exactly") {
  ParamStore ps;
  Rng rng(7);
  const EncoderSpec spec = tiny_spec();
  init_encoder(ps, "enc.", spec, rng);

  const Array t1 = random_row(rng, 3);
  const Array t2 = random_row(rng, 3);
  const Array t3 = random_row(rng, 3);

  // Route 1: incremental belief.
  BeliefState belief(ps, "enc.", spec);
  belief.update(t1);
  belief.update(t2);
  belief.update(t3);

  // Route 2: per-factor evaluation combined by precision addition.
  std::vector<double> prec(spec.z_dim, 1.0);
  std::vector<double> wmean(spec.z_dim, 0.0);
  for (const Array* t : {&t1, &t2, &t3}) {
    const Array out = metacure::numkit::mlp_eval(ps, "enc.", spec.mlp(), *t);
    for (std::size_t i = 0; i < spec.z_dim; ++i) {
      const double var = stable_softplus(out[spec.z_dim + i]) + spec.var_floor;
      prec[i] += 1.0 / var;
      wmean[i] += out[i] / var;
    }
  }
  for (std::size_t i = 0; i < spec.z_dim; ++i) {
    CHECK(belief.variance()[i] == doctest::Approx(1.0 / prec[i]).epsilon(1e-14));
    CHECK(belief.mean()[i] == doctest::Approx(wmean[i] / prec[i]).epsilon(1e-14));
  }

  // Route 3: batched graph encoding of the same rows as one segment.
  Array rows({3, 3});
  for (std::size_t j = 0; j < 3; ++j) {
    rows.at(0, j) = t1[j];
    rows.at(1, j) = t2[j];
    rows.at(2, j) = t3[j];
  }
  Graph g;
  const PosteriorNodes post = encode_segments(g, ps, "enc.", spec, rows, {0, 3});
  REQUIRE(post.mean->value().rows() == 1);
  for (std::size_t i = 0; i < spec.z_dim; ++i) {
    CHECK(post.mean->value()[i] ==
          doctest::Approx(belief.mean()[i]).epsilon(1e-14));
    CHECK(post.var->value()[i] ==
          doctest::Approx(belief.variance()[i]).epsilon(1e-14));
  }
}

TEST_CASE("belief is invariant to the order of transitions") {
  ParamStore ps;
  Rng rng(11);
  const EncoderSpec spec = tiny_spec();
  init_encoder(ps, "enc.", spec, rng);
  const Array t1 = random_row(rng, 3);
  const Array t2 = random_row(rng, 3);

  BeliefState ab(ps, "enc.", spec);
  ab.update(t1);
  ab.update(t2);
  BeliefState ba(ps, "enc.", spec);
  ba.update(t2);
  ba.update(t1);
  for (std::size_t i = 0; i < spec.z_dim; ++i) {
    CHECK(ab.mean()[i] == doctest::Approx(ba.mean()[i]).epsilon(1e-14));
    CHECK(ab.variance()[i] == doctest::Approx(ba.variance()[i]).epsilon(1e-14));
  }
}

TEST_CASE("empty segments yield the prior belief in the graph path") {
  ParamStore ps;
  Rng rng(3);
  const EncoderSpec spec = tiny_spec();
  init_encoder(ps, "enc.", spec, rng);

  Array rows({2, 3});
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = 0.25 * (1.0 + double(i));

  Graph g;
  // Three segments: {row 0}, {}, {row 1}.
  const PosteriorNodes post =
      encode_segments(g, ps, "enc.", spec, rows, {0, 1, 1, 2});
  REQUIRE(post.mean->value().rows() == 3);
  for (std::size_t i = 0; i < spec.z_dim; ++i) {
    CHECK(post.mean->value().at(1, i) == 0.0);
    CHECK(post.var->value().at(1, i) == 1.0);
  }

  Graph g2;
  const PosteriorNodes all_empty =
      encode_segments(g2, ps, "enc.", spec, Array(), {0, 0});
  CHECK(all_empty.mean->value()[0] == 0.0);
  CHECK(all_empty.var->value()[0] == 1.0);
}

TEST_CASE("divergence from the prior matches closed-form cases") {
  CHECK(kl_to_prior({0.0, 0.0}, {1.0, 1.0}) == 0.0);
  CHECK(kl_to_prior({0.7, -0.3}, {1.0, 1.0}) ==
        doctest::Approx(0.5 * (0.49 + 0.09)).epsilon(1e-14));
  CHECK(kl_to_prior({0.0}, {4.0}) ==
        doctest::Approx(0.5 * (4.0 - 1.0 - std::log(4.0))).epsilon(1e-14));
  CHECK_THROWS_AS(kl_to_prior({0.0}, {0.0}), std::invalid_argument);

  Graph g;
  GraphNode* mean = g.input(Array::from({0.0, 0.7, 0.0}));
  GraphNode* var = g.input(Array::from({1.0, 1.0, 4.0}));
  GraphNode* kl = kl_to_prior_graph(g, mean, var);
  CHECK(kl->value()[0] ==
        doctest::Approx(kl_to_prior({0.0, 0.7, 0.0}, {1.0, 1.0, 4.0}))
            .epsilon(1e-14));
}

TEST_CASE("gradients through encoding and divergence match finite differences") {
  ParamStore ps;
  Rng rng(19);
  const EncoderSpec spec = tiny_spec();
  init_encoder(ps, "enc.", spec, rng);

  Array rows({4, 3});
  for (std::size_t i = 0; i < rows.size(); ++i)
    rows[i] = rng.uniform(-1.0, 1.0);
  Array eps({2, spec.z_dim});
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = rng.normal();

  const auto build_loss = [&](Graph& g, ParamStore& p) {
    const PosteriorNodes post = encode_segments(g, p, "enc.", spec, rows, {0, 3, 4});
    GraphNode* z = sample_z_graph(g, post, g.input(eps));
    GraphNode* kl = kl_to_prior_graph(g, post.mean, post.var);
    return g.add(g.mean_all(g.square(z)), g.mean_all(kl));
  };

  Graph g;
  g.backward(build_loss(g, ps));

  const auto numeric = metacure::numkit::finite_diff_grad(
      [&](ParamStore& p) {
        Graph g2;
        return build_loss(g2, p)->value()[0];
      },
      ps);
  const auto cmp = metacure::numkit::compare_gradients(ps, numeric);
  CHECK(cmp.max_rel < 1e-6);
}

TEST_CASE("latent draws follow the belief distribution") {
  ParamStore ps;
  Rng rng(23);
  const EncoderSpec spec = tiny_spec();
  init_encoder(ps, "enc.", spec, rng);
  BeliefState belief(ps, "enc.", spec);
  belief.update(random_row(rng, 3));
  belief.update(random_row(rng, 3));

  Rng draw_a(99);
  Rng draw_b(99);
  const Array za = belief.sample_z(draw_a);
  const Array zb = belief.sample_z(draw_b);
  for (std::size_t i = 0; i < za.size(); ++i) CHECK(za[i] == zb[i]);

  Rng draw(5);
  std::vector<double> sum(spec.z_dim, 0.0);
  std::vector<double> sum_sq(spec.z_dim, 0.0);
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const Array z = belief.sample_z(draw);
    for (std::size_t d = 0; d < spec.z_dim; ++d) {
      sum[d] += z[d];
      sum_sq[d] += z[d] * z[d];
    }
  }
  for (std::size_t d = 0; d < spec.z_dim; ++d) {
    const double mean = sum[d] / n;
    const double var = sum_sq[d] / n - mean * mean;
    CHECK(std::abs(mean - belief.mean()[d]) < 0.02);
    CHECK(std::abs(var - belief.variance()[d]) < 0.02);
  }
}

TEST_CASE("belief vectors expose the mean then the log variance") {
  ParamStore ps;
  Rng rng(31);
  const EncoderSpec spec = tiny_spec();
  init_encoder(ps, "enc.", spec, rng);
  BeliefState belief(ps, "enc.", spec);
  belief.update(random_row(rng, 3));
  const Array b = belief.belief_vector();
  for (std::size_t i = 0; i < spec.z_dim; ++i) {
    CHECK(b[i] == belief.mean()[i]);
    CHECK(b[spec.z_dim + i] ==
          doctest::Approx(std::log(belief.variance()[i])).epsilon(1e-14));
  }
}

TEST_CASE("encoder specs catch bad configurations") {
  EncoderSpec bad = tiny_spec();
  bad.var_floor = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  EncoderSpec zero = tiny_spec();
  zero.z_dim = 0;
  CHECK_THROWS_AS(zero.validate(), std::invalid_argument);

  ParamStore ps;
  Rng rng(1);
  const EncoderSpec spec = tiny_spec();
  init_encoder(ps, "enc.", spec, rng);
  BeliefState belief(ps, "enc.", spec);
  CHECK_THROWS_AS(belief.update(Array::from({1.0})), std::invalid_argument);
}
