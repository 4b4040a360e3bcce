#include "fwi/eval/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace fwi::eval {

double epsilon(const std::vector<Array2Dd>& preds, const std::vector<Array2Dd>& labels) {
  if (preds.size() != labels.size() || preds.empty()) throw std::invalid_argument("epsilon: batch size mismatch");
  double acc = 0;
  size_t cells = 0;
  for (size_t l = 0; l < preds.size(); ++l) {
    if (!preds[l].same_shape(labels[l])) throw std::invalid_argument("epsilon: sample shape mismatch");
    if (!preds[l].same_shape(preds[0])) throw std::invalid_argument("epsilon: ragged batch");
    for (size_t k = 0; k < preds[l].size(); ++k) acc += std::abs(labels[l].data()[k] - preds[l].data()[k]);
    cells += preds[l].size();
  }
  return acc / static_cast<double>(cells);
}

double ssim(const Array2Dd& a, const Array2Dd& b, double range_min, double range_max) {
  if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
  constexpr int kWin = 7;
  if (a.rows() < kWin || a.cols() < kWin) throw std::invalid_argument("ssim: map smaller than the 7x7 window");
  if (range_max <= range_min) throw std::invalid_argument("ssim: empty dynamic range");
  constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const double scale = 1.0 / (range_max - range_min);
  const double inv_n = 1.0 / (kWin * kWin);

  double total = 0;
  int windows = 0;
  for (int i0 = 0; i0 + kWin <= a.rows(); ++i0)
    for (int j0 = 0; j0 + kWin <= a.cols(); ++j0) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = i0; i < i0 + kWin; ++i)
        for (int j = j0; j < j0 + kWin; ++j) {
          double va = (a(i, j) - range_min) * scale;
          double vb = (b(i, j) - range_min) * scale;
          sa += va; sb += vb;
          saa += va * va; sbb += vb * vb; sab += va * vb;
        }
      double mua = sa * inv_n, mub = sb * inv_n;
      double vara = saa * inv_n - mua * mua;
      double varb = sbb * inv_n - mub * mub;
      double cov = sab * inv_n - mua * mub;
      total += ((2 * mua * mub + c1) * (2 * cov + c2)) / ((mua * mua + mub * mub + c1) * (vara + varb + c2));
      ++windows;
    }
  return total / windows;
}

}  // namespace fwi::eval
