#include "metacure/numkit/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace metacure::numkit {

void MlpSpec::validate() const {
  if (input == 0 || output == 0)
    throw std::invalid_argument("MlpSpec: input and output widths must be positive");
  for (std::size_t h : hidden)
    if (h == 0) throw std::invalid_argument("MlpSpec: zero hidden width");
}

std::vector<std::pair<std::size_t, std::size_t>> MlpSpec::layer_dims() const {
  std::vector<std::pair<std::size_t, std::size_t>> dims;
  std::size_t in = input;
  for (std::size_t h : hidden) {
    dims.emplace_back(in, h);
    in = h;
  }
  dims.emplace_back(in, output);
  return dims;
}

void init_mlp(ParamStore& params, const std::string& prefix, const MlpSpec& spec,
              Rng& rng) {
  spec.validate();
  const auto dims = spec.layer_dims();
  for (std::size_t l = 0; l < dims.size(); ++l) {
    const auto [fan_in, fan_out] = dims[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Array w({fan_in, fan_out});
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-bound, bound);
    Array b({std::size_t{1}, fan_out});
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = rng.uniform(-bound, bound);
    params.add(prefix + "w" + std::to_string(l), std::move(w));
    params.add(prefix + "b" + std::to_string(l), std::move(b));
  }
}

namespace {

GraphNode* apply_act(Graph& g, GraphNode* x, Activation act) {
  switch (act) {
    case Activation::Linear: return x;
    case Activation::Tanh: return g.tanh_of(x);
    case Activation::Softplus: return g.softplus(x);
  }
  throw std::logic_error("apply_act: unknown activation");
}

void apply_act_inplace(Array& x, Activation act) {
  switch (act) {
    case Activation::Linear: return;
    case Activation::Tanh:
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::tanh(x[i]);
      return;
    case Activation::Softplus:
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x[i];
        x[i] = v > 30.0 ? v : (v < -30.0 ? std::exp(v) : std::log1p(std::exp(v)));
      }
      return;
  }
  throw std::logic_error("apply_act_inplace: unknown activation");
}

}  // namespace

GraphNode* mlp_forward(Graph& g, ParamStore& params, const std::string& prefix,
                       const MlpSpec& spec, GraphNode* input) {
  spec.validate();
  if (input->value().cols() != spec.input)
    throw std::invalid_argument("mlp_forward: layer " + prefix + "w0 expects input width " +
                                std::to_string(spec.input) + ", got " +
                                std::to_string(input->value().cols()));
  const auto dims = spec.layer_dims();
  GraphNode* h = input;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    GraphNode* w = g.param(params, prefix + "w" + std::to_string(l));
    GraphNode* b = g.param(params, prefix + "b" + std::to_string(l));
    h = g.add_rowvec(g.matmul(h, w), b);
    h = apply_act(g, h, l + 1 < dims.size() ? spec.hidden_act : spec.output_act);
  }
  return h;
}

Array mlp_eval(const ParamStore& params, const std::string& prefix,
               const MlpSpec& spec, const Array& input) {
  spec.validate();
  if (input.cols() != spec.input)
    throw std::invalid_argument("mlp_eval: layer " + prefix + "w0 expects input width " +
                                std::to_string(spec.input) + ", got " +
                                std::to_string(input.cols()));
  const auto dims = spec.layer_dims();
  Array h = input;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    const Array& w = params.value(prefix + "w" + std::to_string(l));
    const Array& b = params.value(prefix + "b" + std::to_string(l));
    Array next({h.rows(), w.cols()}, 0.0);
    matmul_accum(h, w, next);
    for (std::size_t i = 0; i < next.rows(); ++i)
      for (std::size_t j = 0; j < next.cols(); ++j) next.at(i, j) += b[j];
    apply_act_inplace(next, l + 1 < dims.size() ? spec.hidden_act : spec.output_act);
    h = std::move(next);
  }
  return h;
}

}  // namespace metacure::numkit
