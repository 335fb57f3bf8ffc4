#include "metacure/numkit/array.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace metacure::numkit {

Array::Array(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)) {
  if (shape_.empty()) throw std::invalid_argument("Array: empty shape");
  std::size_t n = 1;
  for (std::size_t d : shape_) {
    if (d == 0) throw std::invalid_argument("Array: zero extent in shape");
    n *= d;
  }
  data_.assign(n, fill);
}

Array Array::scalar(double v) {
  Array a({1});
  a.data_[0] = v;
  return a;
}

Array Array::from(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("Array::from: empty values");
  Array a({values.size()});
  a.data_ = std::move(values);
  return a;
}

Array Array::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  Array a({rows, cols});
  if (!values.empty()) {
    if (values.size() != rows * cols)
      throw std::invalid_argument("Array::matrix: values size does not match shape");
    a.data_ = std::move(values);
  }
  return a;
}

std::string Array::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
  os << "]";
  return os.str();
}

void Array::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Array::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void matmul_accum(const Array& a, const Array& b, Array& c) {
  const std::size_t r = a.rows(), k = a.cols(), k2 = b.rows(), n = b.cols();
  if (k != k2)
    throw std::invalid_argument("matmul: inner extents differ, " + a.shape_str() +
                                " vs " + b.shape_str());
  if (c.rows() != r || c.cols() != n)
    throw std::invalid_argument("matmul: output shape " + c.shape_str() + " wrong");
  const double* ap = a.data();
  const double* bp = b.data();
  double* cp = c.data();
  for (std::size_t i = 0; i < r; ++i) {
    const double* arow = ap + i * k;
    double* crow = cp + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = bp + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace metacure::numkit
