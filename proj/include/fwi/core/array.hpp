#pragma once

#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fwi {

// Dense row-major 2D array. Row index first (depth), column second (lateral).
template <class T>
class Array2D {
 public:
  Array2D() = default;
  Array2D(int rows, int cols, T fill = T{})
      : rows_((check_dims(rows, cols), rows)), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }

  T& operator()(int i, int j) {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<size_t>(i) * cols_ + j];
  }
  const T& operator()(int i, int j) const {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<size_t>(i) * cols_ + j];
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& raw() { return data_; }
  const std::vector<T>& raw() const { return data_; }

  void fill(T v) { data_.assign(data_.size(), v); }

  bool same_shape(const Array2D& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  friend bool operator==(const Array2D& a, const Array2D& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  static void check_dims(int rows, int cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Array2D: negative dimensions");
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using Array2Dd = Array2D<double>;
using Array2Df = Array2D<float>;

}  // namespace fwi
