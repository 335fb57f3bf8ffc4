#include <doctest.h>

#include <functional>
#include <stdexcept>

#include "metacure/numkit/finite_diff.hpp"
#include "metacure/numkit/graph.hpp"
#include "metacure/numkit/params.hpp"
#include "metacure/numkit/rng.hpp"

using metacure::numkit::Array;
using metacure::numkit::compare_gradients;
using metacure::numkit::finite_diff_grad;
using metacure::numkit::Graph;
using metacure::numkit::GraphNode;
using metacure::numkit::ParamStore;
using metacure::numkit::Rng;

namespace {

// Builds the same scalar loss twice: once for analytic backward, once per
// finite-difference probe. The builder must be deterministic in the params.
using Builder = std::function<GraphNode*(Graph&, ParamStore&)>;

double check_against_finite_diff(ParamStore& ps, const Builder& build) {
  ps.zero_grads();
  Graph g;
  GraphNode* loss = build(g, ps);
  g.backward(loss);
  auto numeric = finite_diff_grad(
      [&](ParamStore& p) {
        Graph g2;
        return build(g2, p)->value()[0];
      },
      ps);
  return compare_gradients(ps, numeric).max_rel;
}

ParamStore random_store(unsigned seed, std::vector<std::pair<std::string, Array>> specs) {
  Rng rng(seed);
  ParamStore ps;
  for (auto& [name, proto] : specs) {
    Array v = proto;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = rng.uniform(-1.0, 1.0);
    ps.add(name, std::move(v));
  }
  return ps;
}

}  // namespace

TEST_CASE("gradient of sum(w) is all ones") {
  ParamStore ps;
  ps.add("w", Array({2, 3}, 0.7));
  Graph g;
  GraphNode* loss = g.sum_all(g.param(ps, "w"));
  g.backward(loss);
  for (std::size_t i = 0; i < 6; ++i) CHECK(ps.grad("w")[i] == 1.0);
}

TEST_CASE("gradient of half squared norm is w itself") {
  ParamStore ps;
  ps.add("w", Array::from({0.3, -1.2, 2.0}));
  Graph g;
  GraphNode* loss = g.affine(g.sum_all(g.square(g.param(ps, "w"))), 0.5, 0.0);
  g.backward(loss);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(ps.grad("w")[i] == doctest::Approx(ps.value("w")[i]).epsilon(1e-12));
}

TEST_CASE("elementwise and unary ops match finite differences") {
  auto ps = random_store(1, {{"a", Array({2, 3})}, {"b", Array({2, 3})}});
  auto builders = std::vector<Builder>{
      [](Graph& g, ParamStore& p) {
        return g.mean_all(g.mul(g.param(p, "a"), g.param(p, "b")));
      },
      [](Graph& g, ParamStore& p) {
        return g.mean_all(g.sub(g.tanh_of(g.param(p, "a")), g.param(p, "b")));
      },
      [](Graph& g, ParamStore& p) {
        return g.mean_all(g.softplus(g.add(g.param(p, "a"), g.param(p, "b"))));
      },
      [](Graph& g, ParamStore& p) {
        return g.mean_all(g.exp_of(g.affine(g.param(p, "a"), 0.5, -0.1)));
      },
      [](Graph& g, ParamStore& p) {
        // Shift keeps log/sqrt/reciprocal inputs strictly positive.
        GraphNode* pos = g.affine(g.softplus(g.param(p, "a")), 1.0, 0.1);
        return g.mean_all(g.add(g.log_of(pos), g.add(g.sqrt_of(pos), g.reciprocal(pos))));
      },
      [](Graph& g, ParamStore& p) {
        return g.mean_all(g.square(g.min_elem(g.param(p, "a"), g.param(p, "b"))));
      },
  };
  for (const auto& b : builders) CHECK(check_against_finite_diff(ps, b) < 1e-6);
}

TEST_CASE("matmul, broadcast, reshape ops match finite differences") {
  auto ps = random_store(
      2, {{"w", Array({3, 4})}, {"x", Array({2, 3})}, {"b", Array({1, 4})}});
  auto builders = std::vector<Builder>{
      [](Graph& g, ParamStore& p) {
        return g.mean_all(g.square(
            g.add_rowvec(g.matmul(g.param(p, "x"), g.param(p, "w")), g.param(p, "b"))));
      },
      [](Graph& g, ParamStore& p) {
        GraphNode* h = g.matmul(g.param(p, "x"), g.param(p, "w"));
        return g.mean_all(g.square(g.concat_cols(h, g.slice_cols(h, 1, 3))));
      },
      [](Graph& g, ParamStore& p) {
        return g.mean_all(g.square(g.repeat_row(g.param(p, "b"), 5)));
      },
      [](Graph& g, ParamStore& p) {
        return g.mean_all(g.sum_cols(g.tanh_of(g.param(p, "x"))));
      },
      [](Graph& g, ParamStore& p) {
        // Middle segment is empty on purpose.
        return g.mean_all(
            g.square(g.segment_sum(g.tanh_of(g.param(p, "w")), {0, 2, 2, 3})));
      },
  };
  for (const auto& b : builders) CHECK(check_against_finite_diff(ps, b) < 1e-6);
}

TEST_CASE("clamp passes gradient only inside the range") {
  ParamStore ps;
  ps.add("x", Array::from({-2.0, 0.5, 3.0}));
  Graph g;
  GraphNode* loss = g.sum_all(g.clamp(g.param(ps, "x"), -1.0, 1.0));
  g.backward(loss);
  CHECK(ps.grad("x")[0] == 0.0);
  CHECK(ps.grad("x")[1] == 1.0);
  CHECK(ps.grad("x")[2] == 0.0);
}

TEST_CASE("detach blocks gradient flow") {
  ParamStore ps;
  ps.add("x", Array::from({1.0, 2.0}));
  Graph g;
  GraphNode* d = g.detach(g.square(g.param(ps, "x")));
  g.backward(g.sum_all(d));
  CHECK(ps.grad("x")[0] == 0.0);
  CHECK(ps.grad("x")[1] == 0.0);
}

TEST_CASE("min_elem ties route to the first argument") {
  ParamStore ps;
  ps.add("a", Array::from({1.0}));
  ps.add("b", Array::from({1.0}));
  Graph g;
  g.backward(g.sum_all(g.min_elem(g.param(ps, "a"), g.param(ps, "b"))));
  CHECK(ps.grad("a")[0] == 1.0);
  CHECK(ps.grad("b")[0] == 0.0);
}

TEST_CASE("a parameter used twice accumulates both contributions") {
  ParamStore ps;
  ps.add("x", Array::scalar(3.0));
  Graph g;
  GraphNode* x = g.param(ps, "x");
  g.backward(g.sum_all(g.mul(x, x)));  // d/dx x^2 = 2x
  CHECK(ps.grad("x")[0] == doctest::Approx(6.0));
}

TEST_CASE("backward is bit-deterministic across runs") {
  auto run = [] {
    ParamStore ps = random_store(9, {{"w", Array({4, 4})}, {"x", Array({3, 4})}});
    Graph g;
    GraphNode* h = g.tanh_of(g.matmul(g.param(ps, "x"), g.param(ps, "w")));
    g.backward(g.mean_all(g.square(h)));
    return std::make_pair(ps.grad("w"), ps.grad("x"));
  };
  auto [gw1, gx1] = run();
  auto [gw2, gx2] = run();
  for (std::size_t i = 0; i < gw1.size(); ++i) CHECK(gw1[i] == gw2[i]);
  for (std::size_t i = 0; i < gx1.size(); ++i) CHECK(gx1[i] == gx2[i]);
}

TEST_CASE("backward rejects non-scalar losses and repeated calls") {
  ParamStore ps;
  ps.add("x", Array::from({1.0, 2.0}));
  Graph g;
  GraphNode* x = g.param(ps, "x");
  CHECK_THROWS_AS(g.backward(x), std::invalid_argument);

  Graph g2;
  GraphNode* loss = g2.sum_all(g2.param(ps, "x"));
  g2.backward(loss);
  CHECK_THROWS_AS(g2.backward(loss), std::logic_error);
}

TEST_CASE("shape mismatches raise descriptive errors") {
  ParamStore ps;
  ps.add("a", Array({2, 3}, 1.0));
  ps.add("b", Array({3, 2}, 1.0));
  Graph g;
  CHECK_THROWS_AS(g.add(g.param(ps, "a"), g.param(ps, "b")), std::invalid_argument);
  CHECK_THROWS_AS(g.matmul(g.param(ps, "a"), g.param(ps, "a")), std::invalid_argument);
  CHECK_THROWS_AS(g.segment_sum(g.param(ps, "a"), {0, 1}), std::invalid_argument);
}

TEST_CASE("finite_diff_grad on theta squared at 3") {
  ParamStore ps;
  ps.add("theta", Array::scalar(3.0));
  auto numeric = finite_diff_grad(
      [](ParamStore& p) {
        const double t = p.value("theta")[0];
        return t * t;
      },
      ps);
  CHECK(numeric.at("theta")[0] == doctest::Approx(6.0).epsilon(1e-8));
  CHECK(ps.value("theta")[0] == 3.0);
}

TEST_CASE("finite_diff_grad of a constant is zero") {
  ParamStore ps;
  ps.add("theta", Array::from({1.0, -2.0}));
  auto numeric = finite_diff_grad([](ParamStore&) { return 5.0; }, ps);
  CHECK(numeric.at("theta")[0] == 0.0);
  CHECK(numeric.at("theta")[1] == 0.0);
}
