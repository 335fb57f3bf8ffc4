#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "metacure/envkit/tabular.hpp"

namespace metacure::oracle {

// One observed transition in a tabular rollout.
struct TabStep {
  std::size_t s = 0;
  std::size_t a = 0;
  double r = 0.0;
  std::size_t s2 = 0;
};

// Everything observed so far: the initial state plus completed steps. The
// initial state is part of the context because it can carry task information
// when tasks start in different states.
struct TabContext {
  std::size_t s0 = 0;
  std::vector<TabStep> steps;
};

// Action distribution given the observed context and current state. The
// policy sees no task identity, only the context, so it may adapt to past
// outcomes but never condition on the task directly. Policies must be pure
// functions of their arguments; the enumerators call them repeatedly.
using TabularPolicy =
    std::function<std::vector<double>(const TabContext&, std::size_t s)>;

// Posterior over tasks given a context: prior times the initial-state
// likelihood times each observed transition's likelihood, normalized.
// Throws if the context is impossible under every task.
std::vector<double> exact_posterior(const envkit::TabularFamily& fam,
                                    const TabContext& ctx);

// Predictive probability of (r, s2) after taking a in s, with tasks weighted
// by the given posterior.
double exact_pred_prob(const envkit::TabularFamily& fam,
                       const std::vector<double>& posterior, std::size_t s,
                       std::size_t a, double r, std::size_t s2);

struct MiResult {
  double value = 0.0;
  double dropped_mass = 0.0;  // probability pruned by the tiny-branch guard
};

// Information the full context after `depth` steps carries about the task,
// by exhaustive trajectory enumeration. Each leaf contributes the log ratio
// of joint trajectory probabilities, in which the policy factors appear in
// both numerator and denominator.
MiResult exact_mutual_information(const envkit::TabularFamily& fam,
                                  const TabularPolicy& policy, std::size_t depth);

// Same quantity with the policy factors stripped before the ratio is formed:
// only model likelihood products enter the logarithm. Agreement with the
// route above demonstrates that task-blind action choices cancel exactly.
MiResult exact_mutual_information_model_ratio(const envkit::TabularFamily& fam,
                                              const TabularPolicy& policy,
                                              std::size_t depth);

// Information the initial state alone carries about the task.
double initial_state_information(const envkit::TabularFamily& fam);

// Side-by-side check that the trajectory information splits into the
// initial-state term plus per-step expected prediction-gap terms
//   E[ log p(outcome | task)  -  log p(outcome | context so far) ].
// The left side and the step terms are computed by independent traversals.
struct DecompositionReport {
  double mutual_information = 0.0;       // leaf-ratio enumeration
  double initial_state_term = 0.0;
  std::vector<double> step_terms;        // one expected gap per step
  double dropped_mass = 0.0;
  double rhs() const;
  double diff() const;                   // |mutual_information - rhs()|
};

DecompositionReport verify_decomposition(const envkit::TabularFamily& fam,
                                         const TabularPolicy& policy,
                                         std::size_t depth);

// Idealized per-step intrinsic values for one concrete rollout under a known
// task: log p(outcome | task) - log p(outcome | belief over tasks built from
// the context prefix). Throws if the rollout is impossible under that task.
std::vector<double> oracle_intrinsic_trace(const envkit::TabularFamily& fam,
                                           std::size_t task, const TabContext& ctx);

}  // namespace metacure::oracle
