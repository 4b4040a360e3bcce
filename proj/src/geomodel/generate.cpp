#include "fwi/geomodel/generate.hpp"

#include <algorithm>
#include <cmath>

#include "fwi/core/rng.hpp"

namespace fwi::geomodel {

VelocityMap make_layered_background(const GridSpec& grid, const std::vector<double>& layer_velocities,
                                    const std::vector<double>& layer_thicknesses, uint64_t seed, double perturbation,
                                    const VelocityBounds& bounds) {
  grid.validate();
  if (layer_velocities.empty()) throw std::invalid_argument("make_layered_background: empty layer list");
  if (layer_velocities.size() != layer_thicknesses.size())
    throw std::invalid_argument("make_layered_background: velocities/thicknesses size mismatch");
  double total = 0;
  for (double t : layer_thicknesses) total += t;
  if (total < grid.depth() - 1e-9) throw std::invalid_argument("make_layered_background: thicknesses do not cover the domain");
  for (double v : layer_velocities)
    if (v < bounds.v_min || v > bounds.v_max) throw std::invalid_argument("make_layered_background: velocity out of range");

  // layer index per depth row
  std::vector<int> layer_of_row(grid.nz);
  {
    double bottom = layer_thicknesses[0];
    int l = 0;
    for (int i = 0; i < grid.nz; ++i) {
      double z = (i + 0.5) * grid.dz;
      while (z > bottom && l + 1 < static_cast<int>(layer_velocities.size())) bottom += layer_thicknesses[++l];
      layer_of_row[i] = l;
    }
  }

  // smooth lateral wobble per layer: few random Fourier modes, peak-normalized
  VelocityMap m;
  m.grid = grid;
  m.vp = Array2Dd(grid.nz, grid.nx);
  Rng rng(derive_seed(seed, 0xBACC));
  std::vector<std::vector<double>> wobble(layer_velocities.size(), std::vector<double>(grid.nx, 0.0));
  for (auto& w : wobble) {
    double peak = 0;
    double a1 = rng.uniform(-1, 1), a2 = rng.uniform(-1, 1), p1 = rng.uniform(0, 2 * M_PI), p2 = rng.uniform(0, 2 * M_PI);
    for (int j = 0; j < grid.nx; ++j) {
      double x = static_cast<double>(j) / grid.nx;
      w[j] = a1 * std::sin(2 * M_PI * x + p1) + a2 * std::sin(4 * M_PI * x + p2);
      peak = std::max(peak, std::abs(w[j]));
    }
    if (peak > 0)
      for (double& v : w) v /= peak;
  }
  for (int i = 0; i < grid.nz; ++i)
    for (int j = 0; j < grid.nx; ++j) {
      int l = layer_of_row[i];
      double v = layer_velocities[l] * (1.0 + perturbation * wobble[l][j]);
      m.vp(i, j) = std::clamp(v, bounds.v_min, bounds.v_max);
    }
  return m;
}

VelocityMap embed_plume(const VelocityMap& background, const PlumeScenario& scenario) {
  scenario.validate();
  VelocityMap out = background;
  if (scenario.velocity_drop == 0) return out;
  const GridSpec& g = background.grid;
  for (int i = 0; i < g.nz; ++i) {
    double z = (i + 0.5) * g.dz;
    double uz = (z - scenario.center_z) / scenario.extent_z;
    for (int j = 0; j < g.nx; ++j) {
      double x = (j + 0.5) * g.dx;
      double ux = (x - scenario.center_x) / scenario.extent_x;
      double r2 = ux * ux + uz * uz;
      if (r2 > 9.0) continue;  // untouched outside 3 sigma
      out.vp(i, j) = background.vp(i, j) * (1.0 - scenario.velocity_drop * std::exp(-0.5 * r2));
    }
  }
  return out;
}

ElasticModel elastic_from_vp(const VelocityMap& m) {
  m.validate();
  ElasticModel e;
  e.grid = m.grid;
  e.vp = m.vp;
  e.vs = Array2Dd(m.grid.nz, m.grid.nx);
  e.rho = Array2Dd(m.grid.nz, m.grid.nx);
  const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
  for (size_t k = 0; k < m.vp.size(); ++k) {
    double vp = m.vp.data()[k];
    e.vs.data()[k] = vp * inv_sqrt3;
    e.rho.data()[k] = 310.0 * std::pow(vp, 0.25);
  }
  return e;
}

Dataset generate_dataset(const GridSpec& grid, const DatasetGenConfig& cfg, const VelocityBounds& bounds) {
  grid.validate();
  if (cfg.n_scenarios < 1) throw std::invalid_argument("generate_dataset: n_scenarios must be >= 1");
  if (!(cfg.min_mass_proxy > 0) || cfg.min_mass_proxy >= cfg.max_mass_proxy)
    throw std::invalid_argument("generate_dataset: degenerate mass proxy range");

  std::vector<double> thicknesses = cfg.layer_thicknesses;
  if (thicknesses.empty()) thicknesses.assign(cfg.layer_velocities.size(), grid.depth() / cfg.layer_velocities.size());
  VelocityMap background = make_layered_background(grid, cfg.layer_velocities, thicknesses, cfg.seed, 0.01, bounds);

  Dataset ds;
  ds.entries.resize(cfg.n_scenarios);
  double log_lo = std::log(cfg.min_mass_proxy), log_hi = std::log(cfg.max_mass_proxy);
  for (int s = 0; s < cfg.n_scenarios; ++s) {
    // per-scenario sub-seed: parallel generation matches serial bit-for-bit
    Rng rng(derive_seed(cfg.seed, 0x5CE0 + static_cast<uint64_t>(s)));
    // stratified log-uniform: scenario s covers its own slice of the range
    double u = (s + rng.uniform01()) / cfg.n_scenarios;
    double proxy = std::exp(log_lo + u * (log_hi - log_lo));
    double drop = rng.uniform(cfg.drop_min, cfg.drop_max);
    double aspect = rng.uniform(0.6, 1.8);  // extent_x / extent_z
    double area = proxy / (M_PI * drop);
    double ex = std::sqrt(area * aspect);
    double ez = std::sqrt(area / aspect);

    PlumeScenario sc;
    sc.background = background;
    sc.extent_x = ex;
    sc.extent_z = ez;
    sc.velocity_drop = drop;
    sc.center_x = rng.uniform(3 * ex, grid.width() - 3 * ex);
    sc.center_z = rng.uniform(3 * ez, grid.depth() - 3 * ez);
    sc.plume_mass_proxy = mass_proxy(ex, ez, drop);
    sc.validate(bounds);

    DatasetEntry& e = ds.entries[s];
    e.scenario_id = s;
    e.plume_mass_proxy = sc.plume_mass_proxy;
    e.label_value = embed_plume(background, sc);
    e.label_value->validate(bounds);
  }
  return ds;
}

SizePartitions partition_by_size(const Dataset& ds) {
  if (ds.size() < 4) throw std::invalid_argument("partition_by_size: fewer entries than partitions");
  std::vector<const DatasetEntry*> sorted;
  sorted.reserve(ds.size());
  for (const auto& e : ds.entries) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](const DatasetEntry* a, const DatasetEntry* b) {
    if (a->plume_mass_proxy != b->plume_mass_proxy) return a->plume_mass_proxy < b->plume_mass_proxy;
    return a->scenario_id < b->scenario_id;
  });
  size_t n = sorted.size();
  size_t c1 = static_cast<size_t>(std::llround(0.2 * n));
  size_t c2 = static_cast<size_t>(std::llround(0.4 * n));
  size_t c3 = static_cast<size_t>(std::llround(0.6 * n));

  SizePartitions p;
  p.tiny.partition = "tiny";
  p.small.partition = "small";
  p.medium.partition = "medium";
  p.large.partition = "large";
  for (size_t k = 0; k < n; ++k) {
    Dataset* dst = k < c1 ? &p.tiny : k < c2 ? &p.small : k < c3 ? &p.medium : &p.large;
    DatasetEntry e = *sorted[k];
    e.partition_tag = dst->partition;
    dst->entries.push_back(std::move(e));
  }
  return p;
}

}  // namespace fwi::geomodel
