#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "metacure/numkit/array.hpp"

namespace metacure::numkit {

class ParamStore;
class Graph;

// Overflow-safe softplus, shared by the graph op and plain-path code so both
// produce bit-identical values.
double stable_softplus(double x);

// One value in a define-by-run reverse-mode graph. Nodes are owned by the
// Graph that created them; handles stay valid until the Graph is destroyed.
class GraphNode {
 public:
  const Array& value() const { return value_; }
  const Array& grad() const { return grad_; }

 private:
  friend class Graph;
  Array value_;
  Array grad_;
  std::vector<GraphNode*> parents_;
  std::function<void(GraphNode&)> backward_;
  ParamStore* bound_store_ = nullptr;
  std::string bound_name_;
  std::size_t id_ = 0;
  bool reached_ = false;
};

// Arena for one forward/backward pass. Creation order is topological order,
// so backward() walks nodes in reverse creation order; gradients of
// parameter leaves are accumulated into their bound ParamStore entries.
class Graph {
 public:
  GraphNode* input(Array v);
  // Leaf whose value is copied from the store; after backward() its gradient
  // is added to the store's gradient buffer.
  GraphNode* param(ParamStore& store, const std::string& name);
  GraphNode* detach(GraphNode* x);

  GraphNode* add(GraphNode* a, GraphNode* b);
  GraphNode* sub(GraphNode* a, GraphNode* b);
  GraphNode* mul(GraphNode* a, GraphNode* b);
  GraphNode* min_elem(GraphNode* a, GraphNode* b);
  GraphNode* affine(GraphNode* x, double scale, double shift);
  GraphNode* matmul(GraphNode* a, GraphNode* b);
  GraphNode* add_rowvec(GraphNode* x, GraphNode* row);
  GraphNode* repeat_row(GraphNode* row, std::size_t n);

  GraphNode* tanh_of(GraphNode* x);
  GraphNode* softplus(GraphNode* x);
  GraphNode* exp_of(GraphNode* x);
  GraphNode* log_of(GraphNode* x);
  GraphNode* sqrt_of(GraphNode* x);
  GraphNode* square(GraphNode* x);
  GraphNode* reciprocal(GraphNode* x);
  GraphNode* clamp(GraphNode* x, double lo, double hi);

  GraphNode* sum_all(GraphNode* x);
  GraphNode* mean_all(GraphNode* x);
  GraphNode* sum_cols(GraphNode* x);  // [r,c] -> [r,1]
  GraphNode* concat_cols(GraphNode* a, GraphNode* b);
  GraphNode* slice_cols(GraphNode* x, std::size_t j0, std::size_t j1);
  // Sums row blocks of x ([N,c]) into [B,c]; offsets has B+1 ascending
  // entries with offsets.front() == 0 and offsets.back() == N. Empty
  // segments yield zero rows.
  GraphNode* segment_sum(GraphNode* x, std::vector<std::size_t> offsets);

  // Backpropagates from a scalar loss. Call at most once per graph; the
  // walk order is fixed, so identical inputs give bit-identical gradients.
  void backward(GraphNode* loss);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  GraphNode* make(Array value, std::vector<GraphNode*> parents,
                  std::function<void(GraphNode&)> bw);
  static void check_same_shape(const char* op, GraphNode* a, GraphNode* b);
  std::vector<std::unique_ptr<GraphNode>> nodes_;
  bool backward_done_ = false;
};

}  // namespace metacure::numkit
