#include "fwi/physfwi/invert.hpp"

#include <algorithm>
#include <cmath>

namespace fwi::physfwi {

namespace {

geomodel::VelocityMap project(const geomodel::VelocityMap& m, const Array2Dd& g, double step,
                              const geomodel::VelocityBounds& b) {
  geomodel::VelocityMap out = m;
  for (size_t k = 0; k < out.vp.size(); ++k)
    out.vp.data()[k] = std::clamp(m.vp.data()[k] - step * g.data()[k], b.v_min, b.v_max);
  return out;
}

}  // namespace

FwiRunState invert(const wavesim::SurveyData& d, const geomodel::VelocityMap& m0, const FwiObjectiveConfig& cfg,
                   const SimBundle& bundle, const InvertOptions& opt) {
  opt.validate();
  cfg.validate();

  FwiRunState state;
  state.model = project(m0, Array2Dd(m0.grid.nz, m0.grid.nx), 0.0, opt.bounds);

  auto [J, g] = misfit_and_gradient(d, state.model, cfg, bundle);
  state.objective_history.push_back(J);

  double step = opt.initial_step;
  for (int it = 0; it < opt.max_iterations; ++it) {
    double gnorm2 = 0, gmax = 0;
    for (size_t k = 0; k < g.size(); ++k) {
      gnorm2 += g.data()[k] * g.data()[k];
      gmax = std::max(gmax, std::abs(g.data()[k]));
    }
    if (gmax == 0) {
      state.stop_reason = "converged";
      return state;
    }
    if (step <= 0) step = 50.0 / gmax;  // first trial moves at most 50 m/s per cell

    bool accepted = false;
    for (int bt = 0; bt < opt.max_backtracks; ++bt) {
      geomodel::VelocityMap trial = project(state.model, g, step, opt.bounds);
      // Armijo decrease measured against the projected step actually taken
      double dir_dot = 0;
      for (size_t k = 0; k < g.size(); ++k)
        dir_dot += g.data()[k] * (state.model.vp.data()[k] - trial.vp.data()[k]);
      double Jt = misfit(d, trial, cfg, bundle);
      if (Jt <= J - opt.armijo_c * dir_dot) {
        double rel = (J - Jt) / std::max(std::abs(J), 1e-30);
        state.model = std::move(trial);
        J = Jt;
        state.objective_history.push_back(J);
        state.iteration = it + 1;
        state.step_size = step;
        accepted = true;
        step *= 2.0;  // let the line search grow back after cautious steps
        if (rel < opt.rel_decrease_tol) {
          state.stop_reason = "converged";
          return state;
        }
        break;
      }
      step *= opt.backtrack_factor;
    }
    if (!accepted) {
      state.stop_reason = "stalled";
      return state;
    }
    if (it + 1 < opt.max_iterations) g = gradient(d, state.model, cfg, bundle);
  }
  state.stop_reason = "max_iterations";
  return state;
}

}  // namespace fwi::physfwi
