#include "fwi/wavesim/types.hpp"

#include <algorithm>

namespace fwi::wavesim {

double stable_dt(const geomodel::ElasticModel& model, const SimConfig& cfg) {
  cfg.validate();
  double vp_max = *std::max_element(model.vp.raw().begin(), model.vp.raw().end());
  double sum_c = cfg.spatial_order == 2 ? 1.0 : 9.0 / 8.0 + 1.0 / 24.0;
  double h = std::min(model.grid.dx, model.grid.dz);
  return cfg.cfl_safety * h / (vp_max * std::sqrt(2.0) * sum_c);
}

}  // namespace fwi::wavesim
