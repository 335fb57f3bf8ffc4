#include "metacure/oracle/exact.hpp"

#include <cmath>
#include <stdexcept>

namespace metacure::oracle {

namespace {

// Branches whose total probability falls below this are pruned; their mass
// is reported so callers can confirm it stays negligible.
constexpr double kPruneThreshold = 1e-15;

std::vector<double> checked_policy(const TabularPolicy& policy, const TabContext& ctx,
                                   std::size_t s, std::size_t n_actions) {
  std::vector<double> p = policy(ctx, s);
  if (p.size() != n_actions)
    throw std::invalid_argument("oracle: policy returned wrong action count");
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0) throw std::invalid_argument("oracle: negative action probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("oracle: action probabilities do not sum to 1");
  return p;
}

// Per-task model likelihoods of one context: init-state probability times
// the product of transition likelihoods. No prior, no policy factors.
std::vector<double> model_likelihoods(const envkit::TabularFamily& fam,
                                      const TabContext& ctx) {
  std::vector<double> m(fam.n_tasks());
  for (std::size_t k = 0; k < fam.n_tasks(); ++k) {
    double v = fam.init_prob(k, ctx.s0);
    for (const TabStep& st : ctx.steps)
      v *= fam.outcome_prob(k, st.s, st.a, st.r, st.s2);
    m[k] = v;
  }
  return m;
}

// Shared depth-first enumeration over contexts. At each visited context the
// walker carries the per-task model likelihoods and the accumulated policy
// probability, and hands both to the visitor before expanding further.
struct Enumerator {
  const envkit::TabularFamily& fam;
  const TabularPolicy& policy;
  std::size_t depth;
  double dropped_mass = 0.0;

  // visit(ctx, s, model, pol): return value ignored; called for every context
  // at every depth, leaves included.
  template <typename Visitor>
  void run(Visitor&& visit) {
    TabContext ctx;
    for (std::size_t s0 = 0; s0 < fam.n_states(); ++s0) {
      std::vector<double> m(fam.n_tasks());
      double total = 0.0;
      for (std::size_t k = 0; k < fam.n_tasks(); ++k) {
        m[k] = fam.init_prob(k, s0);
        total += fam.prior()[k] * m[k];
      }
      if (total == 0.0) continue;
      ctx.s0 = s0;
      expand(ctx, s0, m, 1.0, visit);
    }
  }

 private:
  template <typename Visitor>
  void expand(TabContext& ctx, std::size_t s, const std::vector<double>& m, double pol,
              Visitor&& visit) {
    visit(static_cast<const TabContext&>(ctx), s, m, pol);
    if (ctx.steps.size() == depth) return;

    const std::vector<double> act = checked_policy(policy, ctx, s, fam.n_actions());
    for (std::size_t a = 0; a < fam.n_actions(); ++a) {
      if (act[a] == 0.0) continue;
      for (const auto& [r, s2] : fam.union_support(s, a)) {
        std::vector<double> m2(m.size());
        double total = 0.0;
        for (std::size_t k = 0; k < m.size(); ++k) {
          m2[k] = m[k] * fam.outcome_prob(k, s, a, r, s2);
          total += fam.prior()[k] * m2[k];
        }
        const double branch_prob = pol * act[a] * total;
        if (branch_prob == 0.0) continue;
        if (branch_prob < kPruneThreshold) {
          dropped_mass += branch_prob;
          continue;
        }
        ctx.steps.push_back({s, a, r, s2});
        expand(ctx, s2, m2, pol * act[a], visit);
        ctx.steps.pop_back();
      }
    }
  }
};

}  // namespace

std::vector<double> exact_posterior(const envkit::TabularFamily& fam,
                                    const TabContext& ctx) {
  std::vector<double> w = model_likelihoods(fam, ctx);
  double total = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    w[k] *= fam.prior()[k];
    total += w[k];
  }
  if (total < kPruneThreshold)
    throw std::invalid_argument(
        "exact_posterior: context has zero probability under every task");
  for (double& v : w) v /= total;
  return w;
}

double exact_pred_prob(const envkit::TabularFamily& fam,
                       const std::vector<double>& posterior, std::size_t s,
                       std::size_t a, double r, std::size_t s2) {
  if (posterior.size() != fam.n_tasks())
    throw std::invalid_argument("exact_pred_prob: posterior has wrong task count");
  double p = 0.0;
  for (std::size_t k = 0; k < posterior.size(); ++k)
    p += posterior[k] * fam.outcome_prob(k, s, a, r, s2);
  return p;
}

MiResult exact_mutual_information(const envkit::TabularFamily& fam,
                                  const TabularPolicy& policy, std::size_t depth) {
  Enumerator walk{fam, policy, depth};
  double mi = 0.0;
  walk.run([&](const TabContext& ctx, std::size_t, const std::vector<double>& m,
               double pol) {
    if (ctx.steps.size() != depth) return;
    // Joint probabilities q_k = prior_k * policy * model_k; the marginal is
    // their sum. Each task contributes q_k * log(q_k / (prior_k * marginal)).
    std::vector<double> q(m.size());
    double marginal = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
      q[k] = fam.prior()[k] * pol * m[k];
      marginal += q[k];
    }
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (q[k] == 0.0) continue;
      mi += q[k] * std::log(q[k] / (fam.prior()[k] * marginal));
    }
  });
  return {mi, walk.dropped_mass};
}

MiResult exact_mutual_information_model_ratio(const envkit::TabularFamily& fam,
                                              const TabularPolicy& policy,
                                              std::size_t depth) {
  Enumerator walk{fam, policy, depth};
  double mi = 0.0;
  walk.run([&](const TabContext& ctx, std::size_t, const std::vector<double>& m,
               double pol) {
    if (ctx.steps.size() != depth) return;
    // The ratio uses model likelihoods only; policy factors never enter the
    // logarithm and appear once in the leaf weight.
    double mix = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) mix += fam.prior()[k] * m[k];
    for (std::size_t k = 0; k < m.size(); ++k) {
      if (m[k] == 0.0) continue;
      mi += fam.prior()[k] * pol * m[k] * std::log(m[k] / mix);
    }
  });
  return {mi, walk.dropped_mass};
}

double initial_state_information(const envkit::TabularFamily& fam) {
  double info = 0.0;
  for (std::size_t s0 = 0; s0 < fam.n_states(); ++s0) {
    const double marginal = fam.marginal_init_prob(s0);
    if (marginal == 0.0) continue;
    for (std::size_t k = 0; k < fam.n_tasks(); ++k) {
      const double p = fam.init_prob(k, s0);
      if (p == 0.0) continue;
      info += fam.prior()[k] * p * std::log(p / marginal);
    }
  }
  return info;
}

double DecompositionReport::rhs() const {
  double s = initial_state_term;
  for (double t : step_terms) s += t;
  return s;
}

double DecompositionReport::diff() const { return std::abs(mutual_information - rhs()); }

DecompositionReport verify_decomposition(const envkit::TabularFamily& fam,
                                         const TabularPolicy& policy,
                                         std::size_t depth) {
  DecompositionReport rep;
  const MiResult lhs = exact_mutual_information(fam, policy, depth);
  rep.mutual_information = lhs.value;
  rep.initial_state_term = initial_state_information(fam);
  rep.step_terms.assign(depth, 0.0);

  // Independent traversal: at every non-leaf context, add the expected gap
  // between the task-conditioned and belief-conditioned log likelihood of
  // the next outcome, weighted by the probability of reaching it.
  Enumerator walk{fam, policy, depth};
  walk.run([&](const TabContext& ctx, std::size_t s, const std::vector<double>& m,
               double pol) {
    const std::size_t t = ctx.steps.size();
    if (t == depth) return;
    std::vector<double> w(m.size());
    double total = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k) {
      w[k] = fam.prior()[k] * m[k];
      total += w[k];
    }
    if (total <= 0.0) return;
    for (double& v : w) v /= total;

    const std::vector<double> act = checked_policy(policy, ctx, s, fam.n_actions());
    for (std::size_t a = 0; a < fam.n_actions(); ++a) {
      if (act[a] == 0.0) continue;
      for (const auto& [r, s2] : fam.union_support(s, a)) {
        const double pred = exact_pred_prob(fam, w, s, a, r, s2);
        if (pred == 0.0) continue;
        for (std::size_t k = 0; k < m.size(); ++k) {
          const double pk = fam.outcome_prob(k, s, a, r, s2);
          if (pk == 0.0 || w[k] == 0.0) continue;
          const double reach = pol * total * w[k] * act[a] * pk;
          rep.step_terms[t] += reach * (std::log(pk) - std::log(pred));
        }
      }
    }
  });
  rep.dropped_mass = std::max(lhs.dropped_mass, walk.dropped_mass);
  return rep;
}

std::vector<double> oracle_intrinsic_trace(const envkit::TabularFamily& fam,
                                           std::size_t task, const TabContext& ctx) {
  if (task >= fam.n_tasks())
    throw std::invalid_argument("oracle_intrinsic_trace: task index out of range");
  std::vector<double> trace;
  trace.reserve(ctx.steps.size());
  TabContext prefix;
  prefix.s0 = ctx.s0;
  for (const TabStep& st : ctx.steps) {
    const std::vector<double> w = exact_posterior(fam, prefix);
    const double p_task = fam.outcome_prob(task, st.s, st.a, st.r, st.s2);
    if (p_task == 0.0)
      throw std::invalid_argument(
          "oracle_intrinsic_trace: rollout impossible under the given task");
    const double pred = exact_pred_prob(fam, w, st.s, st.a, st.r, st.s2);
    trace.push_back(std::log(p_task) - std::log(pred));
    prefix.steps.push_back(st);
  }
  return trace;
}

}  // namespace metacure::oracle
