#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fwi/core/array.hpp"

namespace fwi::geomodel {

// Global P-velocity bounds for every VelocityMap in the workbench.
struct VelocityBounds {
  double v_min = 300.0;
  double v_max = 5000.0;
};

inline const VelocityBounds& default_bounds() {
  static const VelocityBounds b{};
  return b;
}

struct GridSpec {
  int nz = 0;  // vertical cells
  int nx = 0;  // lateral cells
  double dz = 10.0;
  double dx = 10.0;

  void validate() const {
    if (nz < 8 || nx < 8) throw std::invalid_argument("GridSpec: nz and nx must be >= 8");
    if (dz <= 0 || dx <= 0) throw std::invalid_argument("GridSpec: dz and dx must be positive");
  }
  double depth() const { return nz * dz; }
  double width() const { return nx * dx; }
  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.nz == b.nz && a.nx == b.nx && a.dz == b.dz && a.dx == b.dx;
  }
};

struct VelocityMap {
  GridSpec grid;
  Array2Dd vp;  // (nz, nx), m/s

  void validate(const VelocityBounds& b = default_bounds()) const {
    grid.validate();
    if (vp.rows() != grid.nz || vp.cols() != grid.nx) throw std::invalid_argument("VelocityMap: shape mismatch");
    for (double v : vp.raw())
      if (!(v >= b.v_min && v <= b.v_max)) throw std::invalid_argument("VelocityMap: vp out of bounds");
  }
  friend bool operator==(const VelocityMap& a, const VelocityMap& b) { return a.grid == b.grid && a.vp == b.vp; }
};

struct ElasticModel {
  GridSpec grid;
  Array2Dd vp;   // m/s
  Array2Dd vs;   // m/s
  Array2Dd rho;  // kg/m^3

  void validate() const {
    grid.validate();
    if (vp.rows() != grid.nz || vp.cols() != grid.nx || !vp.same_shape(vs) || !vp.same_shape(rho))
      throw std::invalid_argument("ElasticModel: shape mismatch");
    for (size_t k = 0; k < vp.size(); ++k) {
      if (rho.data()[k] <= 0) throw std::invalid_argument("ElasticModel: rho must be positive");
      // vs <= vp/sqrt(2) keeps lambda = rho*vp^2 - 2*mu nonnegative
      if (vs.data()[k] > vp.data()[k] / std::sqrt(2.0) + 1e-9)
        throw std::invalid_argument("ElasticModel: vs exceeds vp/sqrt(2)");
    }
  }
  double mu(int i, int j) const { return rho(i, j) * vs(i, j) * vs(i, j); }
  double lame_lambda(int i, int j) const { return rho(i, j) * vp(i, j) * vp(i, j) - 2.0 * mu(i, j); }
};

struct AcquisitionGeometry {
  std::vector<std::pair<double, double>> sources;    // (x, z) meters
  std::vector<std::pair<double, double>> receivers;  // (x, z) meters
  double dt = 1e-3;                                  // simulation time step, seconds
  int nt = 1000;                                     // simulation steps
  int record_decimation = 1;

  int n_sources() const { return static_cast<int>(sources.size()); }
  int n_receivers() const { return static_cast<int>(receivers.size()); }
  int n_samples() const { return nt / record_decimation; }  // T
  double dt_recorded() const { return dt * record_decimation; }

  void validate(const GridSpec& g) const {
    if (sources.empty() || receivers.empty()) throw std::invalid_argument("AcquisitionGeometry: need sources and receivers");
    if (dt <= 0 || nt < 1 || record_decimation < 1) throw std::invalid_argument("AcquisitionGeometry: bad time sampling");
    auto inside = [&](const std::pair<double, double>& p) {
      return p.first >= 0 && p.first <= g.width() && p.second >= 0 && p.second <= g.depth();
    };
    for (const auto& s : sources)
      if (!inside(s)) throw std::invalid_argument("AcquisitionGeometry: source outside domain");
    for (const auto& r : receivers)
      if (!inside(r)) throw std::invalid_argument("AcquisitionGeometry: receiver outside domain");
  }
  friend bool operator==(const AcquisitionGeometry& a, const AcquisitionGeometry& b) {
    return a.sources == b.sources && a.receivers == b.receivers && a.dt == b.dt && a.nt == b.nt &&
           a.record_decimation == b.record_decimation;
  }
};

struct PlumeScenario {
  VelocityMap background;
  double center_x = 0, center_z = 0;  // meters
  double extent_x = 0, extent_z = 0;  // Gaussian half-axes, meters
  double velocity_drop = 0;           // fractional reduction at plume center, (0, 0.3]
  double plume_mass_proxy = 0;        // pi * extent_x * extent_z * velocity_drop

  void validate(const VelocityBounds& b = default_bounds()) const {
    background.validate(b);
    if (velocity_drop < 0 || velocity_drop > 0.3) throw std::invalid_argument("PlumeScenario: velocity_drop outside [0, 0.3]");
    if (extent_x <= 0 || extent_z <= 0) throw std::invalid_argument("PlumeScenario: extents must be positive");
    const GridSpec& g = background.grid;
    if (center_x - 3 * extent_x < 0 || center_x + 3 * extent_x > g.width() || center_z - 3 * extent_z < 0 ||
        center_z + 3 * extent_z > g.depth())
      throw std::invalid_argument("PlumeScenario: plume (3 sigma) outside domain");
  }
};

inline double mass_proxy(double extent_x, double extent_z, double velocity_drop) {
  return M_PI * extent_x * extent_z * velocity_drop;
}

}  // namespace fwi::geomodel
