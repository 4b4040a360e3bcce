#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fwi/core/array.hpp"
#include "fwi/geomodel/types.hpp"

namespace fwi::wavesim {

// Raised when a finite-difference run produces non-finite fields.
struct InstabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimConfig {
  int spatial_order = 4;                 // 2 or 4
  int pml_cells = 10;
  double pml_reflection_target = 1e-4;
  bool free_surface_top = true;
  double cfl_safety = 0.9;
  // full-history adjoint storage above this budget falls back to checkpointing
  size_t adjoint_memory_budget = size_t(2) << 30;

  void validate() const {
    if (spatial_order != 2 && spatial_order != 4) throw std::invalid_argument("SimConfig: spatial_order must be 2 or 4");
    if (pml_cells < 10) throw std::invalid_argument("SimConfig: pml_cells must be >= 10");
    if (!(pml_reflection_target > 0 && pml_reflection_target < 1))
      throw std::invalid_argument("SimConfig: pml_reflection_target in (0,1)");
    if (!(cfl_safety > 0 && cfl_safety <= 1)) throw std::invalid_argument("SimConfig: cfl_safety in (0,1]");
  }
};

struct SourceWavelet {
  double peak_frequency = 25.0;  // Hz
  double delay = 0.06;           // seconds; >= 1/peak_frequency so the wavelet starts near zero
  double amplitude = 1.0;

  void validate() const {
    if (peak_frequency <= 0) throw std::invalid_argument("SourceWavelet: peak_frequency must be positive");
    if (delay < 1.0 / peak_frequency) throw std::invalid_argument("SourceWavelet: delay must be >= 1/peak_frequency");
  }
};

inline double ricker(double t, const SourceWavelet& w) {
  double tau = t - w.delay;
  double a = M_PI * w.peak_frequency * tau;
  a *= a;
  return w.amplitude * (1.0 - 2.0 * a) * std::exp(-a);
}

// One source firing: (T time samples x R receivers) of vertical particle velocity.
struct ShotGather {
  Array2Dd data;
  double dt_recorded = 0;

  friend bool operator==(const ShotGather& a, const ShotGather& b) {
    return a.dt_recorded == b.dt_recorded && a.data == b.data;
  }
};

// All shots of a survey, d_obs in R^{T x S x R}.
struct SurveyData {
  std::vector<ShotGather> gathers;

  int n_shots() const { return static_cast<int>(gathers.size()); }
  int n_samples() const { return gathers.empty() ? 0 : gathers[0].data.rows(); }
  int n_receivers() const { return gathers.empty() ? 0 : gathers[0].data.cols(); }

  void validate() const {
    for (const auto& g : gathers) {
      if (g.data.rows() != n_samples() || g.data.cols() != n_receivers() || g.dt_recorded != gathers[0].dt_recorded)
        throw std::invalid_argument("SurveyData: inconsistent gathers");
    }
  }
  friend bool operator==(const SurveyData& a, const SurveyData& b) { return a.gathers == b.gathers; }
};

// dt = cfl_safety * min(dx, dz) / (vp_max * sqrt(2) * sum|c_i|),
// sum|c_i| = 1 (order 2) or 9/8 + 1/24 = 7/6 (order 4).
double stable_dt(const geomodel::ElasticModel& model, const SimConfig& cfg);

}  // namespace fwi::wavesim
