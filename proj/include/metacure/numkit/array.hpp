#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace metacure::numkit {

// Dense row-major array of doubles. Rank is 1 or 2 in practice; scalars use
// shape {1}. Rank-1 arrays act as row vectors where a 2-D view is needed.
class Array {
 public:
  Array() = default;
  explicit Array(std::vector<std::size_t> shape, double fill = 0.0);

  static Array scalar(double v);
  static Array from(std::vector<double> values);  // shape {values.size()}
  static Array matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values = {});

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return rank() == 2 ? shape_[0] : 1; }
  std::size_t cols() const { return shape_.empty() ? 0 : shape_.back(); }
  bool same_shape(const Array& o) const { return shape_ == o.shape_; }
  std::string shape_str() const;

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void fill(double v);
  bool all_finite() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// C += A * B for row-major matrices; rank-1 inputs are treated as single rows.
void matmul_accum(const Array& a, const Array& b, Array& c);

}  // namespace metacure::numkit
