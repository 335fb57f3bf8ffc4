#include "metacure/numkit/graph.hpp"

#include <cmath>
#include <stdexcept>

#include "metacure/numkit/params.hpp"

namespace metacure::numkit {

double stable_softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

GraphNode* Graph::make(Array value, std::vector<GraphNode*> parents,
                       std::function<void(GraphNode&)> bw) {
  auto node = std::make_unique<GraphNode>();
  node->grad_ = Array(value.shape(), 0.0);
  node->value_ = std::move(value);
  node->parents_ = std::move(parents);
  node->backward_ = std::move(bw);
  node->id_ = nodes_.size();
  nodes_.push_back(std::move(node));
  return nodes_.back().get();
}

void Graph::check_same_shape(const char* op, GraphNode* a, GraphNode* b) {
  if (!a->value().same_shape(b->value()))
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                a->value().shape_str() + " vs " + b->value().shape_str());
}

GraphNode* Graph::input(Array v) { return make(std::move(v), {}, nullptr); }

GraphNode* Graph::param(ParamStore& store, const std::string& name) {
  GraphNode* n = make(store.value(name), {}, nullptr);
  n->bound_store_ = &store;
  n->bound_name_ = name;
  return n;
}

GraphNode* Graph::detach(GraphNode* x) { return make(x->value(), {}, nullptr); }

GraphNode* Graph::add(GraphNode* a, GraphNode* b) {
  check_same_shape("add", a, b);
  Array out = a->value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b->value()[i];
  return make(std::move(out), {a, b}, [](GraphNode& n) {
    for (std::size_t i = 0; i < n.grad_.size(); ++i) {
      n.parents_[0]->grad_[i] += n.grad_[i];
      n.parents_[1]->grad_[i] += n.grad_[i];
    }
  });
}

GraphNode* Graph::sub(GraphNode* a, GraphNode* b) {
  check_same_shape("sub", a, b);
  Array out = a->value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b->value()[i];
  return make(std::move(out), {a, b}, [](GraphNode& n) {
    for (std::size_t i = 0; i < n.grad_.size(); ++i) {
      n.parents_[0]->grad_[i] += n.grad_[i];
      n.parents_[1]->grad_[i] -= n.grad_[i];
    }
  });
}

GraphNode* Graph::mul(GraphNode* a, GraphNode* b) {
  check_same_shape("mul", a, b);
  Array out = a->value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b->value()[i];
  return make(std::move(out), {a, b}, [](GraphNode& n) {
    for (std::size_t i = 0; i < n.grad_.size(); ++i) {
      n.parents_[0]->grad_[i] += n.grad_[i] * n.parents_[1]->value_[i];
      n.parents_[1]->grad_[i] += n.grad_[i] * n.parents_[0]->value_[i];
    }
  });
}

GraphNode* Graph::min_elem(GraphNode* a, GraphNode* b) {
  check_same_shape("min_elem", a, b);
  Array out = a->value();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::min(out[i], b->value()[i]);
  return make(std::move(out), {a, b}, [](GraphNode& n) {
    // Ties route to the first argument, keeping the walk deterministic.
    for (std::size_t i = 0; i < n.grad_.size(); ++i) {
      if (n.parents_[0]->value_[i] <= n.parents_[1]->value_[i])
        n.parents_[0]->grad_[i] += n.grad_[i];
      else
        n.parents_[1]->grad_[i] += n.grad_[i];
    }
  });
}

GraphNode* Graph::affine(GraphNode* x, double scale, double shift) {
  Array out = x->value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * out[i] + shift;
  return make(std::move(out), {x}, [scale](GraphNode& n) {
    for (std::size_t i = 0; i < n.grad_.size(); ++i)
      n.parents_[0]->grad_[i] += scale * n.grad_[i];
  });
}

GraphNode* Graph::matmul(GraphNode* a, GraphNode* b) {
  const Array& av = a->value();
  const Array& bv = b->value();
  if (av.cols() != bv.rows())
    throw std::invalid_argument("matmul: inner extents differ, " + av.shape_str() +
                                " vs " + bv.shape_str());
  Array out({av.rows(), bv.cols()}, 0.0);
  matmul_accum(av, bv, out);
  return make(std::move(out), {a, b}, [](GraphNode& n) {
    const Array& g = n.grad_;
    const Array& av2 = n.parents_[0]->value_;
    const Array& bv2 = n.parents_[1]->value_;
    Array& ga = n.parents_[0]->grad_;
    Array& gb = n.parents_[1]->grad_;
    const std::size_t r = av2.rows(), k = av2.cols(), c = bv2.cols();
    // ga += g * b^T
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t p = 0; p < k; ++p) {
        double acc = 0.0;
        const double* grow = g.data() + i * c;
        const double* brow = bv2.data() + p * c;
        for (std::size_t j = 0; j < c; ++j) acc += grow[j] * brow[j];
        ga.data()[i * k + p] += acc;
      }
    // gb += a^T * g
    for (std::size_t p = 0; p < k; ++p) {
      double* gbrow = gb.data() + p * c;
      for (std::size_t i = 0; i < r; ++i) {
        const double av3 = av2.data()[i * k + p];
        const double* grow = g.data() + i * c;
        for (std::size_t j = 0; j < c; ++j) gbrow[j] += av3 * grow[j];
      }
    }
  });
}

GraphNode* Graph::add_rowvec(GraphNode* x, GraphNode* row) {
  const Array& xv = x->value();
  const Array& rv = row->value();
  if (rv.rows() != 1 || rv.cols() != xv.cols())
    throw std::invalid_argument("add_rowvec: row shape " + rv.shape_str() +
                                " does not match " + xv.shape_str());
  Array out = xv;
  const std::size_t r = xv.rows(), c = xv.cols();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.data()[i * c + j] += rv[j];
  return make(std::move(out), {x, row}, [](GraphNode& n) {
    const std::size_t r2 = n.value_.rows(), c2 = n.value_.cols();
    for (std::size_t i = 0; i < r2; ++i)
      for (std::size_t j = 0; j < c2; ++j) {
        n.parents_[0]->grad_.data()[i * c2 + j] += n.grad_.data()[i * c2 + j];
        n.parents_[1]->grad_[j] += n.grad_.data()[i * c2 + j];
      }
  });
}

GraphNode* Graph::repeat_row(GraphNode* row, std::size_t n) {
  const Array& rv = row->value();
  if (rv.rows() != 1)
    throw std::invalid_argument("repeat_row: expected a single row, got " + rv.shape_str());
  if (n == 0) throw std::invalid_argument("repeat_row: zero rows");
  const std::size_t c = rv.cols();
  Array out({n, c});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out.data()[i * c + j] = rv[j];
  return make(std::move(out), {row}, [](GraphNode& nd) {
    const std::size_t r2 = nd.value_.rows(), c2 = nd.value_.cols();
    for (std::size_t i = 0; i < r2; ++i)
      for (std::size_t j = 0; j < c2; ++j)
        nd.parents_[0]->grad_[j] += nd.grad_.data()[i * c2 + j];
  });
}

GraphNode* Graph::tanh_of(GraphNode* x) {
  Array out = x->value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  return make(std::move(out), {x}, [](GraphNode& n) {
    for (std::size_t i = 0; i < n.grad_.size(); ++i) {
      const double y = n.value_[i];
      n.parents_[0]->grad_[i] += n.grad_[i] * (1.0 - y * y);
    }
  });
}

GraphNode* Graph::softplus(GraphNode* x) {
  Array out = x->value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_softplus(out[i]);
  return make(std::move(out), {x}, [](GraphNode& n) {
    for (std::size_t i = 0; i < n.grad_.size(); ++i)
      n.parents_[0]->grad_[i] += n.grad_[i] * sigmoid(n.parents_[0]->value_[i]);
  });
}

GraphNode* Graph::exp_of(GraphNode* x) {
  Array out = x->value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
  return make(std::move(out), {x}, [](GraphNode& n) {
    for (std::size_t i = 0; i < n.grad_.size(); ++i)
      n.parents_[0]->grad_[i] += n.grad_[i] * n.value_[i];
  });
}

GraphNode* Graph::log_of(GraphNode* x) {
  Array out = x->value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0.0))
      throw std::invalid_argument("log_of: non-positive input");
    out[i] = std::log(out[i]);
  }
  return make(std::move(out), {x}, [](GraphNode& n) {
    for (std::size_t i = 0; i < n.grad_.size(); ++i)
      n.parents_[0]->grad_[i] += n.grad_[i] / n.parents_[0]->value_[i];
  });
}

GraphNode* Graph::sqrt_of(GraphNode* x) {
  Array out = x->value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0) throw std::invalid_argument("sqrt_of: negative input");
    out[i] = std::sqrt(out[i]);
  }
  return make(std::move(out), {x}, [](GraphNode& n) {
    for (std::size_t i = 0; i < n.grad_.size(); ++i)
      n.parents_[0]->grad_[i] += n.grad_[i] * 0.5 / n.value_[i];
  });
}

GraphNode* Graph::square(GraphNode* x) {
  Array out = x->value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= out[i];
  return make(std::move(out), {x}, [](GraphNode& n) {
    for (std::size_t i = 0; i < n.grad_.size(); ++i)
      n.parents_[0]->grad_[i] += n.grad_[i] * 2.0 * n.parents_[0]->value_[i];
  });
}

GraphNode* Graph::reciprocal(GraphNode* x) {
  Array out = x->value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] == 0.0) throw std::invalid_argument("reciprocal: zero input");
    out[i] = 1.0 / out[i];
  }
  return make(std::move(out), {x}, [](GraphNode& n) {
    for (std::size_t i = 0; i < n.grad_.size(); ++i)
      n.parents_[0]->grad_[i] -= n.grad_[i] * n.value_[i] * n.value_[i];
  });
}

GraphNode* Graph::clamp(GraphNode* x, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("clamp: lo must be < hi");
  Array out = x->value();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::min(hi, std::max(lo, out[i]));
  return make(std::move(out), {x}, [lo, hi](GraphNode& n) {
    for (std::size_t i = 0; i < n.grad_.size(); ++i) {
      const double v = n.parents_[0]->value_[i];
      if (v >= lo && v <= hi) n.parents_[0]->grad_[i] += n.grad_[i];
    }
  });
}

GraphNode* Graph::sum_all(GraphNode* x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x->value().size(); ++i) acc += x->value()[i];
  return make(Array::scalar(acc), {x}, [](GraphNode& n) {
    for (std::size_t i = 0; i < n.parents_[0]->grad_.size(); ++i)
      n.parents_[0]->grad_[i] += n.grad_[0];
  });
}

GraphNode* Graph::mean_all(GraphNode* x) {
  const double inv = 1.0 / static_cast<double>(x->value().size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x->value().size(); ++i) acc += x->value()[i];
  return make(Array::scalar(acc * inv), {x}, [inv](GraphNode& n) {
    for (std::size_t i = 0; i < n.parents_[0]->grad_.size(); ++i)
      n.parents_[0]->grad_[i] += n.grad_[0] * inv;
  });
}

GraphNode* Graph::sum_cols(GraphNode* x) {
  const Array& xv = x->value();
  const std::size_t r = xv.rows(), c = xv.cols();
  Array out({r, 1});
  for (std::size_t i = 0; i < r; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) acc += xv.data()[i * c + j];
    out[i] = acc;
  }
  return make(std::move(out), {x}, [c](GraphNode& n) {
    const std::size_t r2 = n.value_.rows();
    for (std::size_t i = 0; i < r2; ++i)
      for (std::size_t j = 0; j < c; ++j)
        n.parents_[0]->grad_.data()[i * c + j] += n.grad_[i];
  });
}

GraphNode* Graph::concat_cols(GraphNode* a, GraphNode* b) {
  const Array& av = a->value();
  const Array& bv = b->value();
  if (av.rows() != bv.rows())
    throw std::invalid_argument("concat_cols: row counts differ, " + av.shape_str() +
                                " vs " + bv.shape_str());
  const std::size_t r = av.rows(), ca = av.cols(), cb = bv.cols();
  Array out({r, ca + cb});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < ca; ++j) out.data()[i * (ca + cb) + j] = av.data()[i * ca + j];
    for (std::size_t j = 0; j < cb; ++j)
      out.data()[i * (ca + cb) + ca + j] = bv.data()[i * cb + j];
  }
  return make(std::move(out), {a, b}, [ca, cb](GraphNode& n) {
    const std::size_t r2 = n.value_.rows();
    for (std::size_t i = 0; i < r2; ++i) {
      for (std::size_t j = 0; j < ca; ++j)
        n.parents_[0]->grad_.data()[i * ca + j] += n.grad_.data()[i * (ca + cb) + j];
      for (std::size_t j = 0; j < cb; ++j)
        n.parents_[1]->grad_.data()[i * cb + j] += n.grad_.data()[i * (ca + cb) + ca + j];
    }
  });
}

GraphNode* Graph::slice_cols(GraphNode* x, std::size_t j0, std::size_t j1) {
  const Array& xv = x->value();
  const std::size_t r = xv.rows(), c = xv.cols();
  if (j0 >= j1 || j1 > c)
    throw std::invalid_argument("slice_cols: bad range on " + xv.shape_str());
  const std::size_t w = j1 - j0;
  Array out({r, w});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < w; ++j) out.data()[i * w + j] = xv.data()[i * c + j0 + j];
  return make(std::move(out), {x}, [j0, w, c](GraphNode& n) {
    const std::size_t r2 = n.value_.rows();
    for (std::size_t i = 0; i < r2; ++i)
      for (std::size_t j = 0; j < w; ++j)
        n.parents_[0]->grad_.data()[i * c + j0 + j] += n.grad_.data()[i * w + j];
  });
}

GraphNode* Graph::segment_sum(GraphNode* x, std::vector<std::size_t> offsets) {
  const Array& xv = x->value();
  const std::size_t n = xv.rows(), c = xv.cols();
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != n)
    throw std::invalid_argument("segment_sum: offsets must span all rows");
  for (std::size_t i = 1; i < offsets.size(); ++i)
    if (offsets[i] < offsets[i - 1])
      throw std::invalid_argument("segment_sum: offsets must be ascending");
  const std::size_t b = offsets.size() - 1;
  Array out({b, c}, 0.0);
  for (std::size_t s = 0; s < b; ++s)
    for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i)
      for (std::size_t j = 0; j < c; ++j)
        out.data()[s * c + j] += xv.data()[i * c + j];
  return make(std::move(out), {x}, [offsets = std::move(offsets), c](GraphNode& nd) {
    const std::size_t b2 = offsets.size() - 1;
    for (std::size_t s = 0; s < b2; ++s)
      for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i)
        for (std::size_t j = 0; j < c; ++j)
          nd.parents_[0]->grad_.data()[i * c + j] += nd.grad_.data()[s * c + j];
  });
}

void Graph::backward(GraphNode* loss) {
  if (loss == nullptr) throw std::invalid_argument("backward: null loss");
  if (loss->value().size() != 1)
    throw std::invalid_argument("backward: loss must be scalar, got " +
                                loss->value().shape_str());
  if (backward_done_)
    throw std::logic_error("backward: already called on this graph");
  backward_done_ = true;

  std::vector<GraphNode*> stack{loss};
  loss->reached_ = true;
  while (!stack.empty()) {
    GraphNode* n = stack.back();
    stack.pop_back();
    for (GraphNode* p : n->parents_) {
      if (!p->reached_) {
        p->reached_ = true;
        stack.push_back(p);
      }
    }
  }

  loss->grad_[0] = 1.0;
  for (std::size_t i = loss->id_ + 1; i-- > 0;) {
    GraphNode* n = nodes_[i].get();
    if (n->reached_ && n->backward_) n->backward_(*n);
  }
  for (std::size_t i = 0; i <= loss->id_; ++i) {
    GraphNode* n = nodes_[i].get();
    if (!n->reached_ || n->bound_store_ == nullptr) continue;
    Array& g = n->bound_store_->grad(n->bound_name_);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += n->grad_[j];
  }
}

}  // namespace metacure::numkit
