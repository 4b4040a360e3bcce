#pragma once

#include <string>
#include <vector>

#include "fwi/physfwi/objective.hpp"

namespace fwi::physfwi {

struct InvertOptions {
  int max_iterations = 30;
  double initial_step = 0.0;       // m/s per unit gradient; 0 = auto from gradient scale
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 20;
  double rel_decrease_tol = 1e-6;  // stop when accepted relative decrease drops below this
  geomodel::VelocityBounds bounds;

  void validate() const {
    if (max_iterations < 0) throw std::invalid_argument("InvertOptions: max_iterations must be >= 0");
    if (armijo_c <= 0 || armijo_c >= 1) throw std::invalid_argument("InvertOptions: armijo_c must be in (0,1)");
    if (backtrack_factor <= 0 || backtrack_factor >= 1)
      throw std::invalid_argument("InvertOptions: backtrack_factor must be in (0,1)");
    if (max_backtracks < 1) throw std::invalid_argument("InvertOptions: max_backtracks must be >= 1");
    if (rel_decrease_tol < 0) throw std::invalid_argument("InvertOptions: rel_decrease_tol must be >= 0");
  }
};

struct FwiRunState {
  geomodel::VelocityMap model;
  int iteration = 0;                      // accepted steps taken
  std::vector<double> objective_history;  // objective at m0 plus every accepted iterate
  double step_size = 0.0;                 // last accepted step length
  std::string stop_reason;                // "converged" | "max_iterations" | "stalled"
};

// Projected gradient descent with Armijo backtracking on the regularized
// objective. Every iterate is clamped to the velocity bounds before being
// evaluated, so objective_history is non-increasing by construction.
FwiRunState invert(const wavesim::SurveyData& d, const geomodel::VelocityMap& m0, const FwiObjectiveConfig& cfg,
                   const SimBundle& bundle, const InvertOptions& opt = {});

}  // namespace fwi::physfwi
