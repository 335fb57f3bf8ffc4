#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "metacure/numkit/array.hpp"

namespace metacure::numkit {

// Named parameter arrays with matching gradient and Adam moment buffers.
// Iteration order is the sorted name order, which keeps every consumer
// (updates, checkpoints, finite differences) deterministic.
class ParamStore {
 public:
  void add(const std::string& name, Array value);
  bool has(const std::string& name) const;
  std::size_t count() const { return entries_.size(); }
  std::vector<std::string> names() const;

  Array& value(const std::string& name);
  const Array& value(const std::string& name) const;
  Array& grad(const std::string& name);
  const Array& grad(const std::string& name) const;
  Array& moment1(const std::string& name);
  Array& moment2(const std::string& name);
  std::int64_t step(const std::string& name) const;

  void zero_grads();

  template <typename Fn>
  void for_each(Fn&& fn) {  // fn(name, Entry&)
    for (auto& [name, e] : entries_) fn(name, e);
  }

  struct Entry {
    Array value;
    Array grad;
    Array m1;
    Array m2;
    std::int64_t step = 0;
  };

 private:
  Entry& lookup(const std::string& name);
  const Entry& lookup(const std::string& name) const;
  std::map<std::string, Entry> entries_;
};

// One Adam update over every entry of the store. Gradients must be finite;
// they are zeroed afterward and each entry's step counter is incremented.
void adam_step(ParamStore& params, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

}  // namespace metacure::numkit
