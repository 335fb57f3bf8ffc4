#include "metacure/numkit/finite_diff.hpp"

#include <cmath>
#include <stdexcept>

#include "metacure/common/errors.hpp"

namespace metacure::numkit {

std::map<std::string, Array> finite_diff_grad(const LossFn& loss_fn,
                                              ParamStore& params, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("finite_diff_grad: eps must be positive");
  std::map<std::string, Array> out;
  for (const std::string& name : params.names()) {
    Array& v = params.value(name);
    Array g(v.shape(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double saved = v[i];
      v[i] = saved + eps;
      const double up = loss_fn(params);
      v[i] = saved - eps;
      const double down = loss_fn(params);
      v[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw NumericError("finite_diff_grad: non-finite loss at '" + name + "'[" +
                           std::to_string(i) + "]");
      g[i] = (up - down) / (2.0 * eps);
    }
    out.emplace(name, std::move(g));
  }
  return out;
}

double grad_rel_error(double a, double b, double floor) {
  const double denom = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / denom;
}

GradCompareResult compare_gradients(const ParamStore& params,
                                    const std::map<std::string, Array>& numeric) {
  GradCompareResult res;
  for (const auto& [name, num] : numeric) {
    const Array& ana = params.grad(name);
    if (!ana.same_shape(num))
      throw std::invalid_argument("compare_gradients: shape mismatch for '" + name + "'");
    for (std::size_t i = 0; i < num.size(); ++i) {
      const double rel = grad_rel_error(ana[i], num[i]);
      if (rel > res.max_rel) {
        res.max_rel = rel;
        res.worst_name = name;
        res.worst_index = i;
        res.analytic = ana[i];
        res.numeric = num[i];
      }
    }
  }
  return res;
}

}  // namespace metacure::numkit
