#include "fwi/neural/layers.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace fwi::neural {

void LayerSpec::validate() const {
  if (kh < 1 || kw < 1) throw std::invalid_argument("LayerSpec: kernel must be >= 1");
  if (sh < 1 || sw < 1) throw std::invalid_argument("LayerSpec: stride must be >= 1");
  if (ph < 0 || pw < 0) throw std::invalid_argument("LayerSpec: padding must be >= 0");
  if (channels_in < 1 || channels_out < 1) throw std::invalid_argument("LayerSpec: channels must be >= 1");
  if (kind == LayerKind::leaky_relu && (leak < 0 || leak >= 1))
    throw std::invalid_argument("LayerSpec: leak must be in [0,1)");
  if (kind == LayerKind::reshape && target_dims.empty())
    throw std::invalid_argument("LayerSpec: reshape needs target_dims");
}

std::vector<int> LayerSpec::out_dims(const std::vector<int>& in) const {
  if (kind == LayerKind::leaky_relu) return in;
  if (kind == LayerKind::reshape) return target_dims;
  if (in.size() != 3) throw std::invalid_argument("LayerSpec: expected (C,H,W) input");
  if (in[0] != channels_in) throw std::invalid_argument("LayerSpec: channel mismatch");
  int ho, wo;
  if (kind == LayerKind::conv2d) {
    ho = (in[1] + 2 * ph - kh) / sh + 1;
    wo = (in[2] + 2 * pw - kw) / sw + 1;
  } else {
    ho = (in[1] - 1) * sh - 2 * ph + kh;
    wo = (in[2] - 1) * sw - 2 * pw + kw;
  }
  if (ho < 1 || wo < 1) throw std::invalid_argument("LayerSpec: non-positive output dims");
  return {channels_out, ho, wo};
}

namespace {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Columns of `col` enumerate output positions (ho*wo); rows enumerate
// (channel, ki, kj) of the receptive field. Out-of-image taps read as zero.
template <class T>
Mat<T> im2col(const T* img, int c, int h, int w, const LayerSpec& s, int ho, int wo) {
  Mat<T> col = Mat<T>::Zero(static_cast<Eigen::Index>(c) * s.kh * s.kw, static_cast<Eigen::Index>(ho) * wo);
  for (int ch = 0; ch < c; ++ch)
    for (int ki = 0; ki < s.kh; ++ki)
      for (int kj = 0; kj < s.kw; ++kj) {
        Eigen::Index row = (static_cast<Eigen::Index>(ch) * s.kh + ki) * s.kw + kj;
        for (int oy = 0; oy < ho; ++oy) {
          int iy = oy * s.sh - s.ph + ki;
          if (iy < 0 || iy >= h) continue;
          for (int ox = 0; ox < wo; ++ox) {
            int ix = ox * s.sw - s.pw + kj;
            if (ix < 0 || ix >= w) continue;
            col(row, static_cast<Eigen::Index>(oy) * wo + ox) = img[(static_cast<size_t>(ch) * h + iy) * w + ix];
          }
        }
      }
  return col;
}

// Adjoint of im2col: scatter-add column entries back into the image.
template <class T>
void col2im(const Mat<T>& col, T* img, int c, int h, int w, const LayerSpec& s, int ho, int wo) {
  for (int ch = 0; ch < c; ++ch)
    for (int ki = 0; ki < s.kh; ++ki)
      for (int kj = 0; kj < s.kw; ++kj) {
        Eigen::Index row = (static_cast<Eigen::Index>(ch) * s.kh + ki) * s.kw + kj;
        for (int oy = 0; oy < ho; ++oy) {
          int iy = oy * s.sh - s.ph + ki;
          if (iy < 0 || iy >= h) continue;
          for (int ox = 0; ox < wo; ++ox) {
            int ix = ox * s.sw - s.pw + kj;
            if (ix < 0 || ix >= w) continue;
            img[(static_cast<size_t>(ch) * h + iy) * w + ix] += col(row, static_cast<Eigen::Index>(oy) * wo + ox);
          }
        }
      }
}

template <class T>
void check3(const Tensor<T>& x, const char* what) {
  if (x.dims.size() != 3) throw std::invalid_argument(std::string(what) + ": expected rank-3 tensor");
}

}  // namespace

template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, const LayerSpec& spec) {
  spec.validate();
  check3(x, "conv2d_forward");
  if (w.dims != std::vector<int>{spec.channels_out, spec.channels_in, spec.kh, spec.kw})
    throw std::invalid_argument("conv2d_forward: weight shape mismatch");
  if (b.dims != std::vector<int>{spec.channels_out}) throw std::invalid_argument("conv2d_forward: bias shape mismatch");
  std::vector<int> od = spec.out_dims(x.dims);
  int ho = od[1], wo = od[2];
  Mat<T> col = im2col(x.data.data(), x.dims[0], x.dims[1], x.dims[2], spec, ho, wo);
  Eigen::Map<const Mat<T>> wm(w.data.data(), spec.channels_out, static_cast<Eigen::Index>(spec.channels_in) * spec.kh * spec.kw);
  Tensor<T> y(od);
  Eigen::Map<Mat<T>> ym(y.data.data(), spec.channels_out, static_cast<Eigen::Index>(ho) * wo);
  ym.noalias() = wm * col;
  for (int co = 0; co < spec.channels_out; ++co) ym.row(co).array() += b.data[static_cast<size_t>(co)];
  return y;
}

template <class T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& grad_out, const LayerSpec& spec,
                     Tensor<T>& grad_x, Tensor<T>& grad_w, Tensor<T>& grad_b) {
  spec.validate();
  check3(x, "conv2d_backward");
  std::vector<int> od = spec.out_dims(x.dims);
  if (grad_out.dims != od) throw std::invalid_argument("conv2d_backward: grad_out shape mismatch");
  int ho = od[1], wo = od[2];
  Eigen::Index kcols = static_cast<Eigen::Index>(spec.channels_in) * spec.kh * spec.kw;
  Mat<T> col = im2col(x.data.data(), x.dims[0], x.dims[1], x.dims[2], spec, ho, wo);
  Eigen::Map<const Mat<T>> gym(grad_out.data.data(), spec.channels_out, static_cast<Eigen::Index>(ho) * wo);
  grad_w = Tensor<T>(w.dims);
  Eigen::Map<Mat<T>> gwm(grad_w.data.data(), spec.channels_out, kcols);
  gwm.noalias() = gym * col.transpose();
  grad_b = Tensor<T>({spec.channels_out});
  // fixed-order scalar sum: Eigen's vectorized redux peels an
  // alignment-dependent prefix, which breaks bitwise reproducibility
  for (int co = 0; co < spec.channels_out; ++co) {
    const T* base = grad_out.data.data() + static_cast<size_t>(co) * ho * wo;
    T s{};
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(ho) * wo; ++k) s += base[k];
    grad_b.data[static_cast<size_t>(co)] = s;
  }
  Eigen::Map<const Mat<T>> wm(w.data.data(), spec.channels_out, kcols);
  Mat<T> gcol = wm.transpose() * gym;
  grad_x = Tensor<T>(x.dims);
  col2im(gcol, grad_x.data.data(), x.dims[0], x.dims[1], x.dims[2], spec, ho, wo);
}

template <class T>
Tensor<T> tconv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, const LayerSpec& spec) {
  spec.validate();
  check3(x, "tconv2d_forward");
  if (w.dims != std::vector<int>{spec.channels_in, spec.channels_out, spec.kh, spec.kw})
    throw std::invalid_argument("tconv2d_forward: weight shape mismatch");
  if (b.dims != std::vector<int>{spec.channels_out})
    throw std::invalid_argument("tconv2d_forward: bias shape mismatch");
  std::vector<int> od = spec.out_dims(x.dims);
  int ho = od[1], wo = od[2];
  // transposed conv is the adjoint of a conv mapping the output image back to
  // the input image, so x plays the role of that conv's output gradient
  Eigen::Map<const Mat<T>> wm(w.data.data(), spec.channels_in, static_cast<Eigen::Index>(spec.channels_out) * spec.kh * spec.kw);
  Eigen::Map<const Mat<T>> xm(x.data.data(), spec.channels_in, static_cast<Eigen::Index>(x.dims[1]) * x.dims[2]);
  Mat<T> coly = wm.transpose() * xm;
  Tensor<T> y(od);
  col2im(coly, y.data.data(), spec.channels_out, ho, wo, spec, x.dims[1], x.dims[2]);
  for (int co = 0; co < spec.channels_out; ++co) {
    T* base = y.data.data() + static_cast<size_t>(co) * ho * wo;
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(ho) * wo; ++k) base[k] += b.data[static_cast<size_t>(co)];
  }
  return y;
}

template <class T>
void tconv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& grad_out, const LayerSpec& spec,
                      Tensor<T>& grad_x, Tensor<T>& grad_w, Tensor<T>& grad_b) {
  spec.validate();
  check3(x, "tconv2d_backward");
  std::vector<int> od = spec.out_dims(x.dims);
  if (grad_out.dims != od) throw std::invalid_argument("tconv2d_backward: grad_out shape mismatch");
  int ho = od[1], wo = od[2];
  Mat<T> colg = im2col(grad_out.data.data(), spec.channels_out, ho, wo, spec, x.dims[1], x.dims[2]);
  Eigen::Map<const Mat<T>> xm(x.data.data(), spec.channels_in, static_cast<Eigen::Index>(x.dims[1]) * x.dims[2]);
  grad_w = Tensor<T>(w.dims);
  Eigen::Map<Mat<T>> gwm(grad_w.data.data(), spec.channels_in, static_cast<Eigen::Index>(spec.channels_out) * spec.kh * spec.kw);
  gwm.noalias() = xm * colg.transpose();
  grad_b = Tensor<T>({spec.channels_out});
  for (int co = 0; co < spec.channels_out; ++co) {
    const T* base = grad_out.data.data() + static_cast<size_t>(co) * ho * wo;
    T s{};
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(ho) * wo; ++k) s += base[k];
    grad_b.data[static_cast<size_t>(co)] = s;
  }
  Eigen::Map<const Mat<T>> wm(w.data.data(), spec.channels_in, static_cast<Eigen::Index>(spec.channels_out) * spec.kh * spec.kw);
  grad_x = Tensor<T>(x.dims);
  Eigen::Map<Mat<T>> gxm(grad_x.data.data(), spec.channels_in, static_cast<Eigen::Index>(x.dims[1]) * x.dims[2]);
  gxm.noalias() = wm * colg;
}

template <class T>
Tensor<T> leaky_relu_forward(const Tensor<T>& x, double leak) {
  Tensor<T> y(x.dims);
  for (size_t k = 0; k < x.size(); ++k) y.data[k] = x.data[k] >= 0 ? x.data[k] : static_cast<T>(leak) * x.data[k];
  return y;
}

template <class T>
Tensor<T> leaky_relu_backward(const Tensor<T>& x, const Tensor<T>& grad_out, double leak) {
  if (!x.same_dims(grad_out)) throw std::invalid_argument("leaky_relu_backward: shape mismatch");
  Tensor<T> g(x.dims);
  for (size_t k = 0; k < x.size(); ++k)
    g.data[k] = x.data[k] >= 0 ? grad_out.data[k] : static_cast<T>(leak) * grad_out.data[k];
  return g;
}

template <class T>
Tensor<T> reshape_forward(const Tensor<T>& x, const LayerSpec& spec) {
  spec.validate();
  Tensor<T> y(spec.target_dims);
  if (y.size() == x.size()) {
    y.data = x.data;
    return y;
  }
  // top-left crop of a (C,H,W) tensor
  if (x.dims.size() != 3 || spec.target_dims.size() != 3 || spec.target_dims[0] != x.dims[0] ||
      spec.target_dims[1] > x.dims[1] || spec.target_dims[2] > x.dims[2])
    throw std::invalid_argument("reshape_forward: target is neither a reshape nor a crop of the input");
  int c = x.dims[0], h = x.dims[1], w = x.dims[2], ht = spec.target_dims[1], wt = spec.target_dims[2];
  for (int ch = 0; ch < c; ++ch)
    for (int i = 0; i < ht; ++i)
      for (int j = 0; j < wt; ++j)
        y.data[(static_cast<size_t>(ch) * ht + i) * wt + j] = x.data[(static_cast<size_t>(ch) * h + i) * w + j];
  return y;
}

template <class T>
Tensor<T> reshape_backward(const Tensor<T>& x, const Tensor<T>& grad_out, const LayerSpec& spec) {
  if (grad_out.dims != spec.target_dims) throw std::invalid_argument("reshape_backward: grad_out shape mismatch");
  Tensor<T> g(x.dims);
  if (g.size() == grad_out.size()) {
    g.data = grad_out.data;
    return g;
  }
  int c = x.dims[0], h = x.dims[1], w = x.dims[2], ht = spec.target_dims[1], wt = spec.target_dims[2];
  for (int ch = 0; ch < c; ++ch)
    for (int i = 0; i < ht; ++i)
      for (int j = 0; j < wt; ++j)
        g.data[(static_cast<size_t>(ch) * h + i) * w + j] = grad_out.data[(static_cast<size_t>(ch) * ht + i) * wt + j];
  return g;
}

#define FWI_INSTANTIATE(T)                                                                                       \
  template Tensor<T> conv2d_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const LayerSpec&); \
  template void conv2d_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const LayerSpec&,      \
                                   Tensor<T>&, Tensor<T>&, Tensor<T>&);                                         \
  template Tensor<T> tconv2d_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const LayerSpec&); \
  template void tconv2d_backward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const LayerSpec&,     \
                                    Tensor<T>&, Tensor<T>&, Tensor<T>&);                                        \
  template Tensor<T> leaky_relu_forward<T>(const Tensor<T>&, double);                                           \
  template Tensor<T> leaky_relu_backward<T>(const Tensor<T>&, const Tensor<T>&, double);                        \
  template Tensor<T> reshape_forward<T>(const Tensor<T>&, const LayerSpec&);                                    \
  template Tensor<T> reshape_backward<T>(const Tensor<T>&, const Tensor<T>&, const LayerSpec&);

FWI_INSTANTIATE(float)
FWI_INSTANTIATE(double)
#undef FWI_INSTANTIATE

}  // namespace fwi::neural
