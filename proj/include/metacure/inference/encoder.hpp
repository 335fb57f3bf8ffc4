#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "metacure/numkit/array.hpp"
#include "metacure/numkit/graph.hpp"
#include "metacure/numkit/mlp.hpp"
#include "metacure/numkit/params.hpp"
#include "metacure/numkit/rng.hpp"

namespace metacure::inference {

// Amortized task-belief encoder. Each observed transition is mapped to an
// independent Gaussian factor over the latent task variable; factors combine
// with a standard-normal prior by precision addition, so the belief after n
// transitions is again a diagonal Gaussian and the order of transitions does
// not matter.
struct EncoderSpec {
  std::size_t transition_dim = 0;
  std::size_t z_dim = 5;
  std::vector<std::size_t> hidden = {64, 64};
  double var_floor = 1e-7;  // keeps factor precisions finite

  numkit::MlpSpec mlp() const;  // transition_dim -> hidden -> 2 * z_dim
  void validate() const;
};

// One row of encoder input: (state, action, reward, next state).
numkit::Array pack_transition(const numkit::Array& s, const numkit::Array& a,
                              double r, const numkit::Array& s2);

void init_encoder(numkit::ParamStore& params, const std::string& prefix,
                  const EncoderSpec& spec, numkit::Rng& rng);

// --- Graph path (training) ---

struct PosteriorNodes {
  numkit::GraphNode* mean = nullptr;  // [B, z]
  numkit::GraphNode* var = nullptr;   // [B, z]
};

// Encodes N transition rows grouped into B segments by `offsets` (B + 1
// ascending values from 0 to N). An empty segment yields the prior belief.
// Gradients flow back into the encoder parameters.
PosteriorNodes encode_segments(numkit::Graph& g, numkit::ParamStore& params,
                               const std::string& prefix, const EncoderSpec& spec,
                               const numkit::Array& rows,
                               std::vector<std::size_t> offsets);

// Divergence of each row's belief from the standard-normal prior: [B, 1].
numkit::GraphNode* kl_to_prior_graph(numkit::Graph& g, numkit::GraphNode* mean,
                                     numkit::GraphNode* var);

// Reparameterized draw z = mean + sqrt(var) * eps, with eps a fixed input of
// the same shape, so gradients reach the belief parameters.
numkit::GraphNode* sample_z_graph(numkit::Graph& g, PosteriorNodes posterior,
                                  numkit::GraphNode* eps);

// --- Plain path (rollouts and evaluation) ---

double kl_to_prior(const std::vector<double>& mean, const std::vector<double>& var);

// Incremental belief over the latent task variable. Holds a pointer to the
// encoder parameters, which must outlive it; beliefs meant to survive encoder
// updates should be persisted as belief_vector() snapshots.
class BeliefState {
 public:
  BeliefState(const numkit::ParamStore& params, std::string prefix, EncoderSpec spec);

  void reset();  // back to the prior N(0, I)
  void update(const numkit::Array& transition_row);

  std::size_t z_dim() const { return spec_.z_dim; }
  std::size_t transitions_seen() const { return count_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& variance() const { return var_; }

  // (mean, log variance) per latent dimension: 2 * z entries. The prior maps
  // to the all-zero vector.
  numkit::Array belief_vector() const;
  numkit::Array sample_z(numkit::Rng& rng) const;

 private:
  void refresh();  // recompute mean_/var_ from the accumulators
  const numkit::ParamStore* params_;
  std::string prefix_;
  EncoderSpec spec_;
  std::vector<double> sum_precision_;  // per-dim sum of factor precisions
  std::vector<double> sum_wmean_;      // per-dim sum of precision-weighted means
  std::vector<double> mean_;
  std::vector<double> var_;
  std::size_t count_ = 0;
};

}  // namespace metacure::inference
