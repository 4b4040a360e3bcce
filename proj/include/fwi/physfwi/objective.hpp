#pragma once

#include <string>

#include "fwi/core/array.hpp"
#include "fwi/geomodel/types.hpp"
#include "fwi/wavesim/types.hpp"

namespace fwi::physfwi {

enum class RegKind { l2_gradient, l1_gradient_smoothed };

struct FwiObjectiveConfig {
  double reg_weight = 0.0;  // the regularization weight of the objective
  RegKind reg_kind = RegKind::l2_gradient;
  double smoothing_eps = 1.0;  // m/s, for the smoothed l1 penalty

  void validate() const {
    if (reg_weight < 0) throw std::invalid_argument("FwiObjectiveConfig: reg_weight must be >= 0");
    if (smoothing_eps <= 0) throw std::invalid_argument("FwiObjectiveConfig: smoothing_eps must be positive");
  }
};

// Forward-simulation bundle: everything f(m) needs besides the model.
struct SimBundle {
  geomodel::AcquisitionGeometry geometry;
  wavesim::SourceWavelet wavelet;
  wavesim::SimConfig sim;
};

// Penalty on the spatial gradient of m (plain index-space differences).
double regularizer(const geomodel::VelocityMap& m, const FwiObjectiveConfig& cfg);
Array2Dd regularizer_gradient(const geomodel::VelocityMap& m, const FwiObjectiveConfig& cfg);

// ||d - f(m)||_2^2 + reg_weight * R(m)
double misfit(const wavesim::SurveyData& d, const geomodel::VelocityMap& m, const FwiObjectiveConfig& cfg,
              const SimBundle& bundle);

// Adjoint-state gradient of the full objective w.r.t. vp per cell; vs and rho
// follow vp through the fixed elastic closure (chain rule included).
Array2Dd gradient(const wavesim::SurveyData& d, const geomodel::VelocityMap& m, const FwiObjectiveConfig& cfg,
                  const SimBundle& bundle);

// both at once (shares the forward simulations)
std::pair<double, Array2Dd> misfit_and_gradient(const wavesim::SurveyData& d, const geomodel::VelocityMap& m,
                                                const FwiObjectiveConfig& cfg, const SimBundle& bundle);

}  // namespace fwi::physfwi
