#pragma once

#include <functional>
#include <map>
#include <string>

#include "metacure/numkit/array.hpp"
#include "metacure/numkit/params.hpp"

namespace metacure::numkit {

using LossFn = std::function<double(ParamStore&)>;

// Central-difference gradient of loss_fn with respect to every coordinate of
// every entry in params. loss_fn must be deterministic in the parameter
// values (freeze any noise draws before calling). Parameter values are
// restored exactly afterward.
std::map<std::string, Array> finite_diff_grad(const LossFn& loss_fn,
                                              ParamStore& params,
                                              double eps = 1e-5);

// |a - b| relative to max(|a|, |b|, floor); the floor keeps near-zero
// gradients compared on an absolute scale.
double grad_rel_error(double a, double b, double floor = 1e-3);

struct GradCompareResult {
  double max_rel = 0.0;
  std::string worst_name;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Compares analytic gradients held in the store against a finite-difference
// map with matching entries.
GradCompareResult compare_gradients(const ParamStore& params,
                                    const std::map<std::string, Array>& numeric);

}  // namespace metacure::numkit
