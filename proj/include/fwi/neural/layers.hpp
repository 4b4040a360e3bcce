#pragma once

#include <string>

#include "fwi/neural/tensor.hpp"

namespace fwi::neural {

enum class LayerKind { conv2d, transposed_conv2d, leaky_relu, reshape };

struct LayerSpec {
  LayerKind kind = LayerKind::conv2d;
  int kh = 1, kw = 1;
  int sh = 1, sw = 1;
  int ph = 0, pw = 0;
  int channels_in = 1, channels_out = 1;
  double leak = 0.01;
  // reshape target (C, H, W); spatial dims smaller than the input mean a
  // top-left crop (the backward pass zero-pads)
  std::vector<int> target_dims;

  void validate() const;
  // output dims for a (C, H, W) input
  std::vector<int> out_dims(const std::vector<int>& in) const;
  bool has_params() const { return kind == LayerKind::conv2d || kind == LayerKind::transposed_conv2d; }
};

// x: (Ci, H, W); w: (Co, Ci, kh, kw); b: (Co). Cross-correlation with zero
// padding; output (Co, floor((H+2p-k)/s)+1, ...).
template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, const LayerSpec& spec);
template <class T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& grad_out, const LayerSpec& spec,
                     Tensor<T>& grad_x, Tensor<T>& grad_w, Tensor<T>& grad_b);

// x: (Ci, H, W); w: (Ci, Co, kh, kw); b: (Co). Exact adjoint of the matching
// convolution; output (Co, (H-1)s - 2p + k, ...).
template <class T>
Tensor<T> tconv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, const LayerSpec& spec);
template <class T>
void tconv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& grad_out, const LayerSpec& spec,
                      Tensor<T>& grad_x, Tensor<T>& grad_w, Tensor<T>& grad_b);

template <class T>
Tensor<T> leaky_relu_forward(const Tensor<T>& x, double leak);
template <class T>
Tensor<T> leaky_relu_backward(const Tensor<T>& x, const Tensor<T>& grad_out, double leak);

template <class T>
Tensor<T> reshape_forward(const Tensor<T>& x, const LayerSpec& spec);
template <class T>
Tensor<T> reshape_backward(const Tensor<T>& x, const Tensor<T>& grad_out, const LayerSpec& spec);

}  // namespace fwi::neural
