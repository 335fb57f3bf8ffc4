#include <doctest.h>

#include <cmath>
#include <memory>
#include <stdexcept>

#include "metacure/envkit/tabular.hpp"
#include "metacure/numkit/rng.hpp"

using metacure::envkit::random_family;
using metacure::envkit::shifted_start_family;
using metacure::envkit::TabularEnv;
using metacure::envkit::TabularFamily;
using metacure::envkit::TabularTaskModel;
using metacure::envkit::two_arm_bernoulli;
using metacure::envkit::two_arm_deterministic;
using metacure::numkit::Array;
using metacure::numkit::Rng;

TEST_CASE("deterministic two-arm family: arm 0 identifies the task") {
  const TabularFamily fam = two_arm_deterministic();
  REQUIRE(fam.n_tasks() == 2);
  REQUIRE(fam.n_states() == 2);
  REQUIRE(fam.n_actions() == 2);
  REQUIRE(fam.horizon() == 1);
  CHECK(fam.prior()[0] == 0.5);
  CHECK(fam.prior()[1] == 0.5);

  // Arm 0 pays 1 under task 0 and 0 under task 1; arm 1 pays 0 under both.
  CHECK(fam.outcome_prob(0, 0, 0, 1.0, 0) == 1.0);
  CHECK(fam.outcome_prob(1, 0, 0, 0.0, 0) == 1.0);
  CHECK(fam.outcome_prob(1, 0, 0, 1.0, 0) == 0.0);
  CHECK(fam.outcome_prob(0, 0, 1, 0.0, 0) == 1.0);
  CHECK(fam.outcome_prob(1, 0, 1, 0.0, 0) == 1.0);

  const auto support = fam.union_support(0, 0);
  REQUIRE(support.size() == 2);
  CHECK(support[0].first == 0.0);
  CHECK(support[1].first == 1.0);
  CHECK(fam.union_support(0, 1).size() == 1);
}

TEST_CASE("bernoulli two-arm family matches its success probabilities") {
  const TabularFamily fam = two_arm_bernoulli();
  CHECK(fam.outcome_prob(0, 0, 0, 1.0, 0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(fam.outcome_prob(0, 0, 0, 0.0, 0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(fam.outcome_prob(1, 0, 0, 1.0, 0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(fam.outcome_prob(1, 0, 0, 0.0, 0) == doctest::Approx(0.8).epsilon(1e-15));
  const auto support = fam.union_support(0, 0);
  CHECK(support.size() == 2);
}

TEST_CASE("shifted-start family: the first observation carries task identity") {
  const TabularFamily fam = shifted_start_family();
  CHECK(fam.init_prob(0, 0) == 1.0);
  CHECK(fam.init_prob(0, 1) == 0.0);
  CHECK(fam.init_prob(1, 1) == 1.0);
  CHECK(fam.marginal_init_prob(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(fam.marginal_init_prob(1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(fam.horizon() == 2);
}

TEST_CASE("task identification vectors are one-hot") {
  const TabularFamily fam = two_arm_deterministic();
  const Array k0 = fam.kappa_for(0);
  const Array k1 = fam.kappa_for(1);
  REQUIRE(k0.size() == 2);
  CHECK(k0[0] == 1.0);
  CHECK(k0[1] == 0.0);
  CHECK(k1[0] == 0.0);
  CHECK(k1[1] == 1.0);
  CHECK_THROWS_AS(fam.kappa_for(2), std::invalid_argument);
}

TEST_CASE("family construction rejects malformed tables") {
  TabularTaskModel ok;
  ok.dists = {{{{1.0, 0, 1.0}}}};
  ok.init_dist = {1.0};
  CHECK_NOTHROW(TabularFamily(1, 1, 1, {1.0}, {ok}));

  CHECK_THROWS_AS(TabularFamily(1, 1, 1, {0.9}, {ok}), std::invalid_argument);
  CHECK_THROWS_AS(TabularFamily(1, 1, 1, {0.5, 0.5}, {ok}), std::invalid_argument);

  TabularTaskModel bad_sum = ok;
  bad_sum.dists[0][0][0].prob = 0.5;
  CHECK_THROWS_AS(TabularFamily(1, 1, 1, {1.0}, {bad_sum}), std::invalid_argument);

  TabularTaskModel bad_state = ok;
  bad_state.dists[0][0][0].next_state = 3;
  CHECK_THROWS_AS(TabularFamily(1, 1, 1, {1.0}, {bad_state}), std::invalid_argument);

  TabularTaskModel bad_init = ok;
  bad_init.init_dist = {0.7};
  CHECK_THROWS_AS(TabularFamily(1, 1, 1, {1.0}, {bad_init}), std::invalid_argument);

  TabularTaskModel wrong_actions = ok;
  wrong_actions.dists[0].push_back(wrong_actions.dists[0][0]);
  CHECK_THROWS_AS(TabularFamily(1, 1, 1, {1.0}, {wrong_actions}), std::invalid_argument);
}

TEST_CASE("scalar actions are binned into arms by uniform intervals") {
  auto fam = std::make_shared<const TabularFamily>(two_arm_deterministic());
  const TabularEnv env(fam, 0);
  CHECK(env.bin_action(-1.0) == 0);
  CHECK(env.bin_action(-0.001) == 0);
  CHECK(env.bin_action(0.0) == 1);
  CHECK(env.bin_action(1.0) == 1);   // right edge folds into the last arm
  CHECK(env.bin_action(-7.0) == 0);  // out-of-range actions are clipped
  CHECK(env.bin_action(7.0) == 1);
}

TEST_CASE("tabular stepping is exact for deterministic tasks") {
  auto fam = std::make_shared<const TabularFamily>(two_arm_deterministic());
  const TabularEnv pay(fam, 0);
  const TabularEnv dud(fam, 1);
  Rng rng(4);

  const Array s0 = pay.initial_state(rng);
  REQUIRE(TabularEnv::argmax_state(s0) == 0);

  const auto hit = pay.step(s0, Array::from({-1.0}), rng);
  CHECK(hit.reward == 1.0);
  CHECK(TabularEnv::argmax_state(hit.next_state) == 0);

  const auto miss = dud.step(s0, Array::from({-1.0}), rng);
  CHECK(miss.reward == 0.0);

  const auto other_arm = pay.step(s0, Array::from({1.0}), rng);
  CHECK(other_arm.reward == 0.0);
}

TEST_CASE("tabular stepping matches bernoulli frequencies") {
  auto fam = std::make_shared<const TabularFamily>(two_arm_bernoulli());
  const TabularEnv env(fam, 0);
  Rng rng(21);
  const Array s0 = env.initial_state(rng);
  const Array arm0 = Array::from({-1.0});
  int hits = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i)
    if (env.step(s0, arm0, rng).reward == 1.0) ++hits;
  CHECK(std::abs(static_cast<double>(hits) / n - 0.8) < 0.01);
}

TEST_CASE("shifted-start tasks begin in their own states") {
  auto fam = std::make_shared<const TabularFamily>(shifted_start_family());
  const TabularEnv a(fam, 0);
  const TabularEnv b(fam, 1);
  Rng rng(7);
  for (int i = 0; i < 10; ++i) {
    CHECK(TabularEnv::argmax_state(a.initial_state(rng)) == 0);
    CHECK(TabularEnv::argmax_state(b.initial_state(rng)) == 1);
  }
}

TEST_CASE("randomized families always pass their own validation") {
  Rng rng(123);
  for (int i = 0; i < 50; ++i) {
    const TabularFamily fam = random_family(rng);
    CHECK(fam.n_tasks() >= 2);
    CHECK(fam.n_tasks() <= 3);
    CHECK(fam.n_states() >= 2);
    CHECK(fam.n_states() <= 3);
    CHECK(fam.n_actions() >= 2);
    CHECK(fam.n_actions() <= 3);
    CHECK(fam.horizon() >= 1);
    CHECK(fam.horizon() <= 3);

    double marginal = 0.0;
    for (std::size_t s = 0; s < fam.n_states(); ++s)
      marginal += fam.marginal_init_prob(s);
    CHECK(marginal == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(!fam.union_support(0, 0).empty());
  }
}

TEST_CASE("environment construction validates its inputs") {
  auto fam = std::make_shared<const TabularFamily>(two_arm_deterministic());
  CHECK_THROWS_AS(TabularEnv(fam, 5), std::invalid_argument);
  CHECK_THROWS_AS(TabularEnv(nullptr, 0), std::invalid_argument);

  const TabularEnv env(fam, 1);
  CHECK(env.task().tabular_index == 1);
  REQUIRE(env.task().kappa.size() == 2);
  CHECK(env.task().kappa[1] == 1.0);
  Rng rng(2);
  CHECK_THROWS_AS(env.step(Array::from({1.0}), Array::from({0.0}), rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(env.step(Array::from({1.0, 0.0}), Array::from({0.0, 0.0}), rng),
                  std::invalid_argument);
}

TEST_CASE("tabular tasks have no success notion") {
  auto fam = std::make_shared<const TabularFamily>(two_arm_deterministic());
  const TabularEnv env(fam, 0);
  Rng rng(3);
  CHECK_FALSE(env.success(env.initial_state(rng)));
}
