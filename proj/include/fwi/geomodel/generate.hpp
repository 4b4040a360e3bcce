#pragma once

#include <cstdint>
#include <vector>

#include "fwi/geomodel/dataset.hpp"
#include "fwi/geomodel/types.hpp"

namespace fwi::geomodel {

// Depth-increasing layered velocity model with a small seeded lateral
// perturbation (relative amplitude `perturbation`, default 1%).
VelocityMap make_layered_background(const GridSpec& grid, const std::vector<double>& layer_velocities,
                                    const std::vector<double>& layer_thicknesses, uint64_t seed,
                                    double perturbation = 0.01, const VelocityBounds& bounds = default_bounds());

// Gaussian-shaped multiplicative velocity reduction; untouched outside the
// 3-sigma ellipse, max reduction velocity_drop at the center.
VelocityMap embed_plume(const VelocityMap& background, const PlumeScenario& scenario);

// Fixed vp -> (vs, rho) closure: vs = vp/sqrt(3), Gardner rho = 310 * vp^0.25.
ElasticModel elastic_from_vp(const VelocityMap& m);

struct DatasetGenConfig {
  int n_scenarios = 1;
  double min_mass_proxy = 0;  // log-uniform sampling range for plume_mass_proxy
  double max_mass_proxy = 0;
  std::vector<double> layer_velocities = {1600, 2000, 2400, 2900, 3400};
  std::vector<double> layer_thicknesses;  // empty -> equal split of the domain depth
  double drop_min = 0.08, drop_max = 0.3;
  uint64_t seed = 1;
};

// Labeled plume scenarios (velocity maps only; seismograms are filled in by
// the forward solver). plume_mass_proxy is spread log-uniformly.
Dataset generate_dataset(const GridSpec& grid, const DatasetGenConfig& cfg,
                         const VelocityBounds& bounds = default_bounds());

struct SizePartitions {
  Dataset tiny, small, medium, large;
};

// Ascending sort by plume_mass_proxy (ties by scenario_id), split at the
// 20/40/60 percentile boundaries.
SizePartitions partition_by_size(const Dataset& ds);

}  // namespace fwi::geomodel
