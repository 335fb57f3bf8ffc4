#include "metacure/numkit/params.hpp"

#include <cmath>
#include <stdexcept>

#include "metacure/common/errors.hpp"

namespace metacure::numkit {

void ParamStore::add(const std::string& name, Array value) {
  if (name.empty()) throw std::invalid_argument("ParamStore::add: empty name");
  if (entries_.count(name))
    throw std::invalid_argument("ParamStore::add: duplicate name '" + name + "'");
  Entry e;
  e.grad = Array(value.shape(), 0.0);
  e.m1 = Array(value.shape(), 0.0);
  e.m2 = Array(value.shape(), 0.0);
  e.value = std::move(value);
  entries_.emplace(name, std::move(e));
}

bool ParamStore::has(const std::string& name) const { return entries_.count(name) > 0; }

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

ParamStore::Entry& ParamStore::lookup(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end())
    throw std::invalid_argument("ParamStore: unknown parameter '" + name + "'");
  return it->second;
}

const ParamStore::Entry& ParamStore::lookup(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end())
    throw std::invalid_argument("ParamStore: unknown parameter '" + name + "'");
  return it->second;
}

Array& ParamStore::value(const std::string& name) { return lookup(name).value; }
const Array& ParamStore::value(const std::string& name) const { return lookup(name).value; }
Array& ParamStore::grad(const std::string& name) { return lookup(name).grad; }
const Array& ParamStore::grad(const std::string& name) const { return lookup(name).grad; }
Array& ParamStore::moment1(const std::string& name) { return lookup(name).m1; }
Array& ParamStore::moment2(const std::string& name) { return lookup(name).m2; }
std::int64_t ParamStore::step(const std::string& name) const { return lookup(name).step; }

void ParamStore::zero_grads() {
  for (auto& [name, e] : entries_) e.grad.fill(0.0);
}

void adam_step(ParamStore& params, double lr, double beta1, double beta2, double eps) {
  if (!(lr > 0.0)) throw std::invalid_argument("adam_step: lr must be positive");
  params.for_each([&](const std::string& name, ParamStore::Entry& e) {
    if (!e.grad.all_finite())
      throw NumericError("adam_step: non-finite gradient for '" + name + "'");
    e.step += 1;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(e.step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(e.step));
    for (std::size_t i = 0; i < e.value.size(); ++i) {
      const double g = e.grad[i];
      e.m1[i] = beta1 * e.m1[i] + (1.0 - beta1) * g;
      e.m2[i] = beta2 * e.m2[i] + (1.0 - beta2) * g * g;
      const double mhat = e.m1[i] / c1;
      const double vhat = e.m2[i] / c2;
      e.value[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
    e.grad.fill(0.0);
  });
}

}  // namespace metacure::numkit
