#pragma once

#include <numeric>
#include <stdexcept>
#include <vector>

namespace fwi::neural {

// Row-major dense tensor. Float for training, double for gradient-check mode.
template <class T>
struct Tensor {
  std::vector<int> dims;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> d) : dims(std::move(d)) {
    size_t n = 1;
    for (int v : dims) {
      if (v <= 0) throw std::invalid_argument("Tensor: non-positive dimension");
      n *= static_cast<size_t>(v);
    }
    data.assign(n, T{});
  }

  size_t size() const { return data.size(); }
  int dim(int i) const { return dims.at(static_cast<size_t>(i)); }
  bool same_dims(const Tensor& o) const { return dims == o.dims; }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace fwi::neural
