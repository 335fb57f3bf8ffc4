#include "metacure/inference/encoder.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace metacure::inference {

using numkit::Array;
using numkit::Graph;
using numkit::GraphNode;
using numkit::MlpSpec;
using numkit::ParamStore;
using numkit::Rng;

MlpSpec EncoderSpec::mlp() const {
  MlpSpec m;
  m.input = transition_dim;
  m.hidden = hidden;
  m.output = 2 * z_dim;
  return m;
}

void EncoderSpec::validate() const {
  if (transition_dim == 0 || z_dim == 0)
    throw std::invalid_argument("EncoderSpec: zero dimensions");
  if (!(var_floor > 0.0))
    throw std::invalid_argument("EncoderSpec: variance floor must be positive");
  mlp().validate();
}

Array pack_transition(const Array& s, const Array& a, double r, const Array& s2) {
  if (s.size() != s2.size())
    throw std::invalid_argument("pack_transition: state widths differ");
  Array row({s.size() + a.size() + 1 + s2.size()});
  std::size_t j = 0;
  for (std::size_t i = 0; i < s.size(); ++i) row[j++] = s[i];
  for (std::size_t i = 0; i < a.size(); ++i) row[j++] = a[i];
  row[j++] = r;
  for (std::size_t i = 0; i < s2.size(); ++i) row[j++] = s2[i];
  return row;
}

void init_encoder(ParamStore& params, const std::string& prefix,
                  const EncoderSpec& spec, Rng& rng) {
  spec.validate();
  numkit::init_mlp(params, prefix, spec.mlp(), rng);
}

PosteriorNodes encode_segments(Graph& g, ParamStore& params, const std::string& prefix,
                               const EncoderSpec& spec, const Array& rows,
                               std::vector<std::size_t> offsets) {
  spec.validate();
  if (offsets.size() < 2)
    throw std::invalid_argument("encode_segments: need at least one segment");
  const std::size_t z = spec.z_dim;

  GraphNode* prec_sum;
  GraphNode* wmean_sum;
  if (rows.size() == 0) {
    // All segments empty: only the prior contributes.
    Array zeros({offsets.size() - 1, z});
    prec_sum = g.input(zeros);
    wmean_sum = g.input(zeros);
  } else {
    GraphNode* factors = numkit::mlp_forward(g, params, prefix, spec.mlp(), g.input(rows));
    GraphNode* mu = g.slice_cols(factors, 0, z);
    GraphNode* var = g.affine(g.softplus(g.slice_cols(factors, z, 2 * z)), 1.0,
                              spec.var_floor);
    GraphNode* prec = g.reciprocal(var);
    prec_sum = g.segment_sum(prec, offsets);
    wmean_sum = g.segment_sum(g.mul(mu, prec), std::move(offsets));
  }

  PosteriorNodes out;
  // Posterior precision adds the unit prior precision.
  out.var = g.reciprocal(g.affine(prec_sum, 1.0, 1.0));
  out.mean = g.mul(wmean_sum, out.var);
  return out;
}

GraphNode* kl_to_prior_graph(Graph& g, GraphNode* mean, GraphNode* var) {
  // Per dimension: (var + mean^2 - 1 - log var) / 2, summed across dims.
  GraphNode* terms = g.sub(g.add(var, g.square(mean)), g.log_of(var));
  return g.sum_cols(g.affine(terms, 0.5, -0.5));
}

GraphNode* sample_z_graph(Graph& g, PosteriorNodes posterior, GraphNode* eps) {
  return g.add(posterior.mean, g.mul(g.sqrt_of(posterior.var), eps));
}

double kl_to_prior(const std::vector<double>& mean, const std::vector<double>& var) {
  if (mean.size() != var.size())
    throw std::invalid_argument("kl_to_prior: mean/variance size mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (!(var[i] > 0.0))
      throw std::invalid_argument("kl_to_prior: variance must be positive");
    kl += 0.5 * (var[i] + mean[i] * mean[i] - 1.0 - std::log(var[i]));
  }
  return kl;
}

BeliefState::BeliefState(const ParamStore& params, std::string prefix, EncoderSpec spec)
    : params_(&params), prefix_(std::move(prefix)), spec_(std::move(spec)) {
  spec_.validate();
  reset();
}

void BeliefState::reset() {
  sum_precision_.assign(spec_.z_dim, 0.0);
  sum_wmean_.assign(spec_.z_dim, 0.0);
  count_ = 0;
  refresh();
}

void BeliefState::update(const Array& transition_row) {
  if (transition_row.size() != spec_.transition_dim)
    throw std::invalid_argument("BeliefState::update: transition width mismatch");
  const Array out = numkit::mlp_eval(*params_, prefix_, spec_.mlp(), transition_row);
  for (std::size_t i = 0; i < spec_.z_dim; ++i) {
    const double mu = out[i];
    const double raw = out[spec_.z_dim + i];
    const double var = numkit::stable_softplus(raw) + spec_.var_floor;
    sum_precision_[i] += 1.0 / var;
    sum_wmean_[i] += mu / var;
  }
  ++count_;
  refresh();
}

void BeliefState::refresh() {
  mean_.assign(spec_.z_dim, 0.0);
  var_.assign(spec_.z_dim, 0.0);
  for (std::size_t i = 0; i < spec_.z_dim; ++i) {
    const double precision = 1.0 + sum_precision_[i];
    var_[i] = 1.0 / precision;
    mean_[i] = sum_wmean_[i] / precision;
  }
}

Array BeliefState::belief_vector() const {
  Array b({2 * spec_.z_dim});
  for (std::size_t i = 0; i < spec_.z_dim; ++i) {
    b[i] = mean_[i];
    b[spec_.z_dim + i] = std::log(var_[i]);
  }
  return b;
}

Array BeliefState::sample_z(Rng& rng) const {
  Array z({spec_.z_dim});
  for (std::size_t i = 0; i < spec_.z_dim; ++i)
    z[i] = mean_[i] + std::sqrt(var_[i]) * rng.normal();
  return z;
}

}  // namespace metacure::inference
