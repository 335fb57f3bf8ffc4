#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "metacure/numkit/array.hpp"
#include "metacure/numkit/graph.hpp"
#include "metacure/numkit/params.hpp"
#include "metacure/numkit/rng.hpp"

namespace metacure::numkit {

enum class Activation { Linear, Tanh, Softplus };

struct MlpSpec {
  std::size_t input = 0;
  std::vector<std::size_t> hidden;
  std::size_t output = 0;
  Activation hidden_act = Activation::Tanh;
  Activation output_act = Activation::Linear;

  void validate() const;
  std::size_t layer_count() const { return hidden.size() + 1; }
  // (fan_in, fan_out) per layer, in order.
  std::vector<std::pair<std::size_t, std::size_t>> layer_dims() const;
};

// Creates weight/bias entries "<prefix>w<i>"/"<prefix>b<i>", both drawn from
// U[-1/sqrt(fan_in), 1/sqrt(fan_in)].
void init_mlp(ParamStore& params, const std::string& prefix, const MlpSpec& spec,
              Rng& rng);

// Forward pass on the graph. Input is [batch, spec.input] (a rank-1 array is
// one row); output is [batch, spec.output].
GraphNode* mlp_forward(Graph& g, ParamStore& params, const std::string& prefix,
                       const MlpSpec& spec, GraphNode* input);

// Forward pass without gradient recording, for rollouts and relabeling.
Array mlp_eval(const ParamStore& params, const std::string& prefix,
               const MlpSpec& spec, const Array& input);

}  // namespace metacure::numkit
