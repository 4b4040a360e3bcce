#pragma once

#include <vector>

#include "fwi/core/array.hpp"

namespace fwi::eval {

// Batch MAE normalized by sample count and map dimensions:
// (1 / (L * M * N)) * sum_l ||label_l - pred_l||_1. Inputs in normalized
// units (callers scale velocity maps by the dataset range first).
double epsilon(const std::vector<Array2Dd>& preds, const std::vector<Array2Dd>& labels);

// Both maps are rescaled to [0,1] using [range_min, range_max] as the
// dynamic range, then mean local SSIM over sliding 7x7 uniform windows with
// C1 = 0.01^2, C2 = 0.03^2. Maps must be at least 7x7.
double ssim(const Array2Dd& a, const Array2Dd& b, double range_min, double range_max);

}  // namespace fwi::eval
