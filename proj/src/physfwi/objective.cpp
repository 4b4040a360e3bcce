#include "fwi/physfwi/objective.hpp"

#include <cmath>

#include "fwi/geomodel/generate.hpp"
#include "fwi/wavesim/engine.hpp"
#include "fwi/wavesim/simulate.hpp"

namespace fwi::physfwi {

double regularizer(const geomodel::VelocityMap& m, const FwiObjectiveConfig& cfg) {
  const Array2Dd& v = m.vp;
  double r = 0;
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < v.cols(); ++j) {
      double gx = j + 1 < v.cols() ? v(i, j + 1) - v(i, j) : 0;
      double gz = i + 1 < v.rows() ? v(i + 1, j) - v(i, j) : 0;
      if (cfg.reg_kind == RegKind::l2_gradient)
        r += gx * gx + gz * gz;
      else
        r += std::sqrt(gx * gx + gz * gz + cfg.smoothing_eps * cfg.smoothing_eps) - cfg.smoothing_eps;
    }
  return r;
}

Array2Dd regularizer_gradient(const geomodel::VelocityMap& m, const FwiObjectiveConfig& cfg) {
  const Array2Dd& v = m.vp;
  Array2Dd g(v.rows(), v.cols());
  for (int i = 0; i < v.rows(); ++i)
    for (int j = 0; j < v.cols(); ++j) {
      double gx = j + 1 < v.cols() ? v(i, j + 1) - v(i, j) : 0;
      double gz = i + 1 < v.rows() ? v(i + 1, j) - v(i, j) : 0;
      double wx, wz;
      if (cfg.reg_kind == RegKind::l2_gradient) {
        wx = 2 * gx;
        wz = 2 * gz;
      } else {
        double den = std::sqrt(gx * gx + gz * gz + cfg.smoothing_eps * cfg.smoothing_eps);
        wx = gx / den;
        wz = gz / den;
      }
      if (j + 1 < v.cols()) {
        g(i, j + 1) += wx;
        g(i, j) -= wx;
      }
      if (i + 1 < v.rows()) {
        g(i + 1, j) += wz;
        g(i, j) -= wz;
      }
    }
  return g;
}

namespace {

double data_misfit_for_shot(const Array2Dd& sim, const Array2Dd& obs, Array2Dd* residual_adjoint) {
  if (!sim.same_shape(obs)) throw std::invalid_argument("misfit: observed and simulated gathers disagree in shape");
  double v = 0;
  for (int t = 0; t < sim.rows(); ++t)
    for (int r = 0; r < sim.cols(); ++r) {
      double diff = sim(t, r) - obs(t, r);
      v += diff * diff;
      if (residual_adjoint) (*residual_adjoint)(t, r) = 2.0 * diff;
    }
  return v;
}

// d(rho)/d(vp), d(lambda)/d(vp), d(mu)/d(vp) of the fixed closure
// rho = 310 vp^0.25, vs = vp/sqrt(3)
struct ClosureDerivs {
  double drho, dlam, dmu;
};
ClosureDerivs closure_derivs(double vp) {
  double drho = 310.0 * 0.25 * std::pow(vp, -0.75);
  double rho = 310.0 * std::pow(vp, 0.25);
  // mu = rho vp^2 / 3 ; lambda = rho vp^2 - 2 mu
  double dmu = (drho * vp * vp + rho * 2.0 * vp) / 3.0;
  double dlam = drho * vp * vp + rho * 2.0 * vp - 2.0 * dmu;
  return {drho, dlam, dmu};
}

}  // namespace

double misfit(const wavesim::SurveyData& d, const geomodel::VelocityMap& m, const FwiObjectiveConfig& cfg,
              const SimBundle& bundle) {
  cfg.validate();
  wavesim::SurveyData sim = wavesim::simulate_shots(m, bundle.geometry, bundle.wavelet, bundle.sim);
  if (sim.n_shots() != d.n_shots()) throw std::invalid_argument("misfit: shot count mismatch");
  double v = 0;
  for (int s = 0; s < sim.n_shots(); ++s) v += data_misfit_for_shot(sim.gathers[s].data, d.gathers[s].data, nullptr);
  return v + cfg.reg_weight * regularizer(m, cfg);
}

std::pair<double, Array2Dd> misfit_and_gradient(const wavesim::SurveyData& d, const geomodel::VelocityMap& m,
                                                const FwiObjectiveConfig& cfg, const SimBundle& bundle) {
  cfg.validate();
  m.validate();
  geomodel::ElasticModel model = geomodel::elastic_from_vp(m);
  const int n_shots = bundle.geometry.n_sources();
  if (d.n_shots() != n_shots) throw std::invalid_argument("gradient: shot count mismatch");

  std::vector<double> shot_misfit(n_shots, 0.0);
  std::vector<wavesim::ShotEngine::MaterialGradients> shot_grads(n_shots);
  // per-shot forward+adjoint are independent; accumulation below keeps a
  // fixed order so results do not depend on the worker count
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < n_shots; ++s) {
    wavesim::ShotEngine engine(model, bundle.geometry, s, bundle.wavelet, bundle.sim);
    wavesim::ShotGather sim = engine.run_forward(true);
    Array2Dd adj(sim.data.rows(), sim.data.cols());
    shot_misfit[s] = data_misfit_for_shot(sim.data, d.gathers[s].data, &adj);
    shot_grads[s] = engine.run_adjoint(adj);
  }

  double value = 0;
  Array2Dd g(m.grid.nz, m.grid.nx);
  for (int s = 0; s < n_shots; ++s) {
    value += shot_misfit[s];
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) {
        ClosureDerivs cd = closure_derivs(m.vp(i, j));
        g(i, j) += shot_grads[s].d_rho(i, j) * cd.drho + shot_grads[s].d_lambda(i, j) * cd.dlam +
                   shot_grads[s].d_mu(i, j) * cd.dmu;
      }
  }
  if (cfg.reg_weight > 0) {
    value += cfg.reg_weight * regularizer(m, cfg);
    Array2Dd rg = regularizer_gradient(m, cfg);
    for (size_t k = 0; k < g.size(); ++k) g.data()[k] += cfg.reg_weight * rg.data()[k];
  }
  return {value, std::move(g)};
}

Array2Dd gradient(const wavesim::SurveyData& d, const geomodel::VelocityMap& m, const FwiObjectiveConfig& cfg,
                  const SimBundle& bundle) {
  return misfit_and_gradient(d, m, cfg, bundle).second;
}

}  // namespace fwi::physfwi
