#include "fwi/wavesim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace fwi::wavesim {

namespace {
constexpr int kHalo = 2;
}

ShotEngine::ShotEngine(const geomodel::ElasticModel& model, const geomodel::AcquisitionGeometry& geometry,
                       int source_index, const SourceWavelet& wavelet, const SimConfig& cfg) {
  model.validate();
  geometry.validate(model.grid);
  wavelet.validate();
  cfg.validate();
  if (source_index < 0 || source_index >= geometry.n_sources())
    throw std::invalid_argument("ShotEngine: source_index out of range");
  if (geometry.dt > stable_dt(model, cfg) * (1.0 + 1e-12))
    throw std::invalid_argument("ShotEngine: geometry.dt violates the CFL bound");

  nz_ = model.grid.nz;
  nx_ = model.grid.nx;
  dz_ = model.grid.dz;
  dx_ = model.grid.dx;
  dt_ = geometry.dt;
  nt_ = geometry.nt;
  decim_ = geometry.record_decimation;
  n_samples_ = geometry.n_samples();
  free_surface_ = cfg.free_surface_top;
  pml_ = cfg.pml_cells;
  pad_top_ = free_surface_ ? 0 : pml_;
  nzp_ = nz_ + pad_top_ + pml_;
  nxp_ = nx_ + 2 * pml_;
  bsx_ = nxp_ + 2 * kHalo;
  memory_budget_ = cfg.adjoint_memory_budget;
  if (cfg.spatial_order == 2) {
    c1_ = 1.0;
    c2_ = 0.0;
  } else {
    c1_ = 9.0 / 8.0;
    c2_ = -1.0 / 24.0;
  }

  const size_t np = static_cast<size_t>(nzp_) * nxp_;
  const size_t nb = static_cast<size_t>(nzp_ + 2 * kHalo) * bsx_;

  // padded material fields (edge replication), staggered averaging
  auto mat_at = [&](const Array2Dd& a, int i, int j) {
    int ii = std::clamp(i - pad_top_, 0, nz_ - 1);
    int jj = std::clamp(j - pml_, 0, nx_ - 1);
    return a(ii, jj);
  };
  dtbx_.resize(np);
  dtbz_.resize(np);
  bx_.resize(np);
  bz_.resize(np);
  l2m_.resize(np);
  lam_.resize(np);
  muh_.resize(np);
  double vp_max = 0;
  for (int i = 0; i < nzp_; ++i)
    for (int j = 0; j < nxp_; ++j) {
      size_t p = static_cast<size_t>(i) * nxp_ + j;
      double rho = mat_at(model.rho, i, j);
      double vp = mat_at(model.vp, i, j);
      double vs = mat_at(model.vs, i, j);
      vp_max = std::max(vp_max, vp);
      double mu = rho * vs * vs;
      double lambda = rho * vp * vp - 2.0 * mu;
      l2m_[p] = lambda + 2.0 * mu;
      lam_[p] = lambda;
      // vx at (i, j+1/2), vz at (i+1/2, j): arithmetic density average
      double rho_x = 0.5 * (rho + mat_at(model.rho, i, j + 1));
      double rho_z = 0.5 * (rho + mat_at(model.rho, i + 1, j));
      bx_[p] = 1.0 / rho_x;
      bz_[p] = 1.0 / rho_z;
      dtbx_[p] = dt_ * bx_[p];
      dtbz_[p] = dt_ * bz_[p];
      // txz at (i+1/2, j+1/2): 4-point average of mu
      double mu_sum = mu;
      {
        double r = mat_at(model.rho, i + 1, j), s = mat_at(model.vs, i + 1, j);
        mu_sum += r * s * s;
        r = mat_at(model.rho, i, j + 1), s = mat_at(model.vs, i, j + 1);
        mu_sum += r * s * s;
        r = mat_at(model.rho, i + 1, j + 1), s = mat_at(model.vs, i + 1, j + 1);
        mu_sum += r * s * s;
      }
      muh_[p] = 0.25 * mu_sum;
    }

  // CPML recursion constants
  auto build_profile = [&](int n, int pad_lo, int pad_hi, double h, bool half, std::vector<double>& a,
                           std::vector<double>& b) {
    a.assign(n, 0.0);
    b.assign(n, 1.0);
    double alpha_max = M_PI * wavelet.peak_frequency;
    for (int k = 0; k < n; ++k) {
      double pos = half ? k + 0.5 : static_cast<double>(k);
      double u = 0;
      double len = 0;
      if (pad_lo > 0 && pos < pad_lo) {
        u = (pad_lo - pos) / pad_lo;
        len = pad_lo * h;
      } else if (pad_hi > 0 && pos > n - 1 - pad_hi) {
        u = (pos - (n - 1 - pad_hi)) / pad_hi;
        len = pad_hi * h;
      }
      if (u <= 0) continue;
      double d0 = -3.0 * vp_max * std::log(cfg.pml_reflection_target) / (2.0 * len);
      double d = d0 * u * u;
      double alpha = alpha_max * (1.0 - u);
      b[k] = std::exp(-(d + alpha) * dt_);
      a[k] = d / (d + alpha) * (b[k] - 1.0);
    }
  };
  build_profile(nxp_, pml_, pml_, dx_, false, ax_, bxp_);
  build_profile(nxp_, pml_, pml_, dx_, true, axh_, bxph_);
  build_profile(nzp_, pad_top_, pml_, dz_, false, az_, bzp_);
  build_profile(nzp_, pad_top_, pml_, dz_, true, azh_, bzph_);

  vx_.assign(nb, 0.0);
  vz_.assign(nb, 0.0);
  txx_.assign(nb, 0.0);
  tzz_.assign(nb, 0.0);
  txz_.assign(nb, 0.0);
  for (auto* p : {&p_txx_x_, &p_txz_z_, &p_txz_x_, &p_tzz_z_, &p_vx_x_, &p_vz_z_, &p_vx_z_, &p_vz_x_}) p->assign(np, 0.0);
  for (auto* p : {&svx_, &svz_, &sexx_, &sezz_, &sexz_}) p->assign(np, 0.0);

  // source on the vz sub-grid (z = (i+0.5) dz, x = j dx), bilinear weights
  auto vz_cells = [&](double x, double z) {
    std::vector<std::pair<int, double>> cells;
    double fx = x / dx_;
    double fz = z / dz_ - 0.5;
    int j0 = static_cast<int>(std::floor(fx));
    int i0 = static_cast<int>(std::floor(fz));
    double tx = fx - j0, tz = fz - i0;
    for (int di = 0; di <= 1; ++di)
      for (int dj = 0; dj <= 1; ++dj) {
        double w = (di ? tz : 1 - tz) * (dj ? tx : 1 - tx);
        if (w == 0) continue;
        int i = std::clamp(i0 + di, 0, nz_ - 1) + pad_top_;
        int j = std::clamp(j0 + dj, 0, nx_ - 1) + pml_;
        cells.emplace_back(i * nxp_ + j, w);
      }
    return cells;
  };
  src_cells_ = vz_cells(geometry.sources[source_index].first, geometry.sources[source_index].second);
  rcv_cells_.reserve(geometry.receivers.size());
  for (const auto& r : geometry.receivers) rcv_cells_.push_back(vz_cells(r.first, r.second));

  wavelet_samples_.resize(nt_);
  for (int n = 0; n < nt_; ++n) wavelet_samples_[n] = ricker(n * dt_, wavelet) / (dx_ * dz_);

  gather_.data = Array2Dd(n_samples_, geometry.n_receivers());
  gather_.dt_recorded = geometry.dt_recorded();
}

// ---------------------------------------------------------------------------
// forward
// ---------------------------------------------------------------------------

#define FIDX(i, j) (static_cast<size_t>((i) + kHalo) * bsx_ + ((j) + kHalo))
#define PIDX(i, j) (static_cast<size_t>(i) * nxp_ + (j))

void ShotEngine::step(int n, bool record, int hist_slot) {
  const double ihx = 1.0 / dx_, ihz = 1.0 / dz_;
  const int nzp = nzp_, nxp = nxp_;
  double* vx = vx_.data();
  double* vz = vz_.data();
  double* txx = txx_.data();
  double* tzz = tzz_.data();
  double* txz = txz_.data();

  // strip column/row ranges (half-position strips start one cell earlier on
  // the high side; the integer profile is zero there so sharing is harmless)
  const int xl0 = 0, xl1 = pml_, xr0 = nxp - pml_ - 1, xr1 = nxp;
  const int zt0 = 0, zt1 = pad_top_, zb0 = nzp - pml_ - 1, zb1 = nzp;

  // phase A: velocity brackets
  for (int i = 0; i < nzp; ++i) {
    for (int j = 0; j < nxp; ++j) {
      size_t p = PIDX(i, j);
      size_t f = FIDX(i, j);
      svx_[p] = (c1_ * (txx[f + 1] - txx[f]) + c2_ * (txx[f + 2] - txx[f - 1])) * ihx +
                (c1_ * (txz[f] - txz[f - bsx_]) + c2_ * (txz[f + bsx_] - txz[f - 2 * bsx_])) * ihz;
      svz_[p] = (c1_ * (txz[f] - txz[f - 1]) + c2_ * (txz[f + 1] - txz[f - 2])) * ihx +
                (c1_ * (tzz[f + bsx_] - tzz[f]) + c2_ * (tzz[f + 2 * bsx_] - tzz[f - bsx_])) * ihz;
    }
  }
  auto strip_x_v = [&](int j_begin, int j_end) {
    for (int i = 0; i < nzp; ++i)
      for (int j = j_begin; j < j_end; ++j) {
        size_t p = PIDX(i, j);
        size_t f = FIDX(i, j);
        double rx_h = (c1_ * (txx[f + 1] - txx[f]) + c2_ * (txx[f + 2] - txx[f - 1])) * ihx;
        double ps = bxph_[j] * p_txx_x_[p] + axh_[j] * rx_h;
        p_txx_x_[p] = ps;
        svx_[p] += ps;
        double rx_i = (c1_ * (txz[f] - txz[f - 1]) + c2_ * (txz[f + 1] - txz[f - 2])) * ihx;
        ps = bxp_[j] * p_txz_x_[p] + ax_[j] * rx_i;
        p_txz_x_[p] = ps;
        svz_[p] += ps;
      }
  };
  auto strip_z_v = [&](int i_begin, int i_end) {
    for (int i = i_begin; i < i_end; ++i)
      for (int j = 0; j < nxp; ++j) {
        size_t p = PIDX(i, j);
        size_t f = FIDX(i, j);
        double rz_i = (c1_ * (txz[f] - txz[f - bsx_]) + c2_ * (txz[f + bsx_] - txz[f - 2 * bsx_])) * ihz;
        double ps = bzp_[i] * p_txz_z_[p] + az_[i] * rz_i;
        p_txz_z_[p] = ps;
        svx_[p] += ps;
        double rz_h = (c1_ * (tzz[f + bsx_] - tzz[f]) + c2_ * (tzz[f + 2 * bsx_] - tzz[f - bsx_])) * ihz;
        ps = bzph_[i] * p_tzz_z_[p] + azh_[i] * rz_h;
        p_tzz_z_[p] = ps;
        svz_[p] += ps;
      }
  };
  strip_x_v(xl0, xl1);
  strip_x_v(xr0, xr1);
  if (pad_top_ > 0) strip_z_v(zt0, zt1);
  strip_z_v(zb0, zb1);

  // source (vertical body force folded into the vz bracket)
  for (const auto& [p, w] : src_cells_) svz_[p] += wavelet_samples_[n] * w;

  for (int i = 0; i < nzp; ++i)
    for (int j = 0; j < nxp; ++j) {
      size_t p = PIDX(i, j);
      size_t f = FIDX(i, j);
      vx[f] += dtbx_[p] * svx_[p];
      vz[f] += dtbz_[p] * svz_[p];
    }

  // phase C: stress brackets
  for (int i = 0; i < nzp; ++i)
    for (int j = 0; j < nxp; ++j) {
      size_t p = PIDX(i, j);
      size_t f = FIDX(i, j);
      sexx_[p] = (c1_ * (vx[f] - vx[f - 1]) + c2_ * (vx[f + 1] - vx[f - 2])) * ihx;
      sezz_[p] = (c1_ * (vz[f] - vz[f - bsx_]) + c2_ * (vz[f + bsx_] - vz[f - 2 * bsx_])) * ihz;
      sexz_[p] = (c1_ * (vx[f + bsx_] - vx[f]) + c2_ * (vx[f + 2 * bsx_] - vx[f - bsx_])) * ihz +
                 (c1_ * (vz[f + 1] - vz[f]) + c2_ * (vz[f + 2] - vz[f - 1])) * ihx;
    }
  auto strip_x_s = [&](int j_begin, int j_end) {
    for (int i = 0; i < nzp; ++i)
      for (int j = j_begin; j < j_end; ++j) {
        size_t p = PIDX(i, j);
        size_t f = FIDX(i, j);
        double rx_i = (c1_ * (vx[f] - vx[f - 1]) + c2_ * (vx[f + 1] - vx[f - 2])) * ihx;
        double ps = bxp_[j] * p_vx_x_[p] + ax_[j] * rx_i;
        p_vx_x_[p] = ps;
        sexx_[p] += ps;
        double rx_h = (c1_ * (vz[f + 1] - vz[f]) + c2_ * (vz[f + 2] - vz[f - 1])) * ihx;
        ps = bxph_[j] * p_vz_x_[p] + axh_[j] * rx_h;
        p_vz_x_[p] = ps;
        sexz_[p] += ps;
      }
  };
  auto strip_z_s = [&](int i_begin, int i_end) {
    for (int i = i_begin; i < i_end; ++i)
      for (int j = 0; j < nxp; ++j) {
        size_t p = PIDX(i, j);
        size_t f = FIDX(i, j);
        double rz_i = (c1_ * (vz[f] - vz[f - bsx_]) + c2_ * (vz[f + bsx_] - vz[f - 2 * bsx_])) * ihz;
        double ps = bzp_[i] * p_vz_z_[p] + az_[i] * rz_i;
        p_vz_z_[p] = ps;
        sezz_[p] += ps;
        double rz_h = (c1_ * (vx[f + bsx_] - vx[f]) + c2_ * (vx[f + 2 * bsx_] - vx[f - bsx_])) * ihz;
        ps = bzph_[i] * p_vx_z_[p] + azh_[i] * rz_h;
        p_vx_z_[p] = ps;
        sexz_[p] += ps;
      }
  };
  strip_x_s(xl0, xl1);
  strip_x_s(xr0, xr1);
  if (pad_top_ > 0) strip_z_s(zt0, zt1);
  strip_z_s(zb0, zb1);

  for (int i = 0; i < nzp; ++i)
    for (int j = 0; j < nxp; ++j) {
      size_t p = PIDX(i, j);
      size_t f = FIDX(i, j);
      txx[f] += dt_ * (l2m_[p] * sexx_[p] + lam_[p] * sezz_[p]);
      tzz[f] += dt_ * (lam_[p] * sexx_[p] + l2m_[p] * sezz_[p]);
      txz[f] += dt_ * muh_[p] * sexz_[p];
    }

  // phase D: free surface (sigma_zz = 0 at the top row, antisymmetric images)
  if (free_surface_) {
    for (int j = 0; j < nxp; ++j) {
      tzz[FIDX(0, j)] = 0.0;
      tzz[FIDX(-1, j)] = -tzz[FIDX(1, j)];
      txz[FIDX(-1, j)] = -txz[FIDX(0, j)];
      txz[FIDX(-2, j)] = -txz[FIDX(1, j)];
    }
  }

  if (record) {
    const size_t np = static_cast<size_t>(nzp_) * nxp_;
    double* h = history_.data() + static_cast<size_t>(hist_slot) * 5 * np;
    std::memcpy(h, svx_.data(), np * sizeof(double));
    std::memcpy(h + np, svz_.data(), np * sizeof(double));
    std::memcpy(h + 2 * np, sexx_.data(), np * sizeof(double));
    std::memcpy(h + 3 * np, sezz_.data(), np * sizeof(double));
    std::memcpy(h + 4 * np, sexz_.data(), np * sizeof(double));
  }
}

void ShotEngine::record_sample(int s) {
  for (int r = 0; r < gather_.data.cols(); ++r) {
    double v = 0;
    for (const auto& [p, w] : rcv_cells_[r]) {
      int i = static_cast<int>(p) / nxp_;
      int j = static_cast<int>(p) % nxp_;
      v += w * vz_[FIDX(i, j)];
    }
    gather_.data(s, r) = v;
  }
}

ShotEngine::State ShotEngine::capture_state() const {
  State s;
  s.vx = vx_;
  s.vz = vz_;
  s.txx = txx_;
  s.tzz = tzz_;
  s.txz = txz_;
  const std::vector<double>* ps[8] = {&p_txx_x_, &p_txz_z_, &p_txz_x_, &p_tzz_z_, &p_vx_x_, &p_vz_z_, &p_vx_z_, &p_vz_x_};
  for (int k = 0; k < 8; ++k) s.psi[k] = *ps[k];
  return s;
}

void ShotEngine::restore_state(const State& s) {
  vx_ = s.vx;
  vz_ = s.vz;
  txx_ = s.txx;
  tzz_ = s.tzz;
  txz_ = s.txz;
  std::vector<double>* ps[8] = {&p_txx_x_, &p_txz_z_, &p_txz_x_, &p_tzz_z_, &p_vx_x_, &p_vz_z_, &p_vx_z_, &p_vz_x_};
  for (int k = 0; k < 8; ++k) *ps[k] = s.psi[k];
}

void ShotEngine::ensure_history() {
  const size_t np = static_cast<size_t>(nzp_) * nxp_;
  size_t full_bytes = static_cast<size_t>(nt_) * 5 * np * sizeof(double);
  history_full_ = full_bytes <= memory_budget_;
  if (history_full_) {
    history_.resize(static_cast<size_t>(nt_) * 5 * np);
  } else {
    history_.resize(static_cast<size_t>(checkpoint_every_) * 5 * np);
    checkpoints_.clear();
  }
}

ShotGather ShotEngine::run_forward(bool record_history) {
  // reset
  for (auto* f : {&vx_, &vz_, &txx_, &tzz_, &txz_}) std::fill(f->begin(), f->end(), 0.0);
  for (auto* p : {&p_txx_x_, &p_txz_z_, &p_txz_x_, &p_tzz_z_, &p_vx_x_, &p_vz_z_, &p_vx_z_, &p_vz_x_})
    std::fill(p->begin(), p->end(), 0.0);
  if (record_history) ensure_history();
  if (record_interior_energy) interior_energy.assign(nt_, 0.0);

  for (int n = 0; n < nt_; ++n) {
    if (record_history && !history_full_ && n % checkpoint_every_ == 0) checkpoints_.push_back(capture_state());
    step(n, record_history && history_full_, n);
    if ((n + 1) % decim_ == 0) {
      int s = (n + 1) / decim_ - 1;
      if (s < n_samples_) record_sample(s);
    }
    if (record_interior_energy) interior_energy[n] = interior_kinetic_energy();
    if ((n & 127) == 0 || n == nt_ - 1) {
      double probe = 0;
      for (const auto& cells : rcv_cells_)
        for (const auto& [p, w] : cells) probe += vz_[FIDX(p / nxp_, p % nxp_)];
      if (!std::isfinite(probe)) throw InstabilityError("elastic solver produced non-finite fields at step " + std::to_string(n));
    }
  }
  have_history_ = record_history;
  return gather_;
}

double ShotEngine::interior_kinetic_energy() const {
  double e = 0;
  for (int i = 0; i < nz_; ++i)
    for (int j = 0; j < nx_; ++j) {
      size_t f = FIDX(i + pad_top_, j + pml_);
      e += vx_[f] * vx_[f] + vz_[f] * vz_[f];
    }
  return e;
}

// ---------------------------------------------------------------------------
// adjoint: exact transpose of step(), run backwards over the history
// ---------------------------------------------------------------------------

namespace {
struct AdjointScratch {
  std::vector<double> avx, avz, atxx, atzz, atxz;          // adjoint fields (halo layout)
  std::vector<double> apsi[8];                             // adjoint CPML memory
  std::vector<double> ex, ez, exz_a, exz_b;                // adjoint brackets (halo layout)
  std::vector<double> gbx, gbz, gl2m, glam, gmuh;          // parameter gradients
};
}  // namespace

ShotEngine::MaterialGradients ShotEngine::run_adjoint(const Array2Dd& gather_adjoint) {
  if (!have_history_) throw std::logic_error("run_adjoint requires run_forward(record_history=true) first");
  if (gather_adjoint.rows() != n_samples_ || gather_adjoint.cols() != static_cast<int>(rcv_cells_.size()))
    throw std::invalid_argument("run_adjoint: gather adjoint shape mismatch");

  const size_t np = static_cast<size_t>(nzp_) * nxp_;
  const size_t nb = static_cast<size_t>(nzp_ + 2 * kHalo) * bsx_;
  const double ihx = 1.0 / dx_, ihz = 1.0 / dz_;
  const int nzp = nzp_, nxp = nxp_;

  AdjointScratch s;
  for (auto* f : {&s.avx, &s.avz, &s.atxx, &s.atzz, &s.atxz, &s.ex, &s.ez, &s.exz_a, &s.exz_b}) f->assign(nb, 0.0);
  for (auto& p : s.apsi) p.assign(np, 0.0);
  for (auto* g : {&s.gbx, &s.gbz, &s.gl2m, &s.glam, &s.gmuh}) g->assign(np, 0.0);

  double* avx = s.avx.data();
  double* avz = s.avz.data();
  double* atxx = s.atxx.data();
  double* atzz = s.atzz.data();
  double* atxz = s.atxz.data();

  const int xl0 = 0, xl1 = pml_, xr0 = nxp - pml_ - 1, xr1 = nxp;
  const int zt0 = 0, zt1 = pad_top_, zb0 = nzp - pml_ - 1, zb1 = nzp;

  auto reverse_range = [&](int n_hi, int n_lo, const double* hist_base) {
    // process steps n_hi-1 .. n_lo with history slots (n - n_lo)
    for (int n = n_hi - 1; n >= n_lo; --n) {
      const double* h = hist_base + static_cast<size_t>(n - n_lo) * 5 * np;
      const double* h_svx = h;
      const double* h_svz = h + np;
      const double* h_exx = h + 2 * np;
      const double* h_ezz = h + 3 * np;
      const double* h_exz = h + 4 * np;

      // E': recording
      if ((n + 1) % decim_ == 0) {
        int smp = (n + 1) / decim_ - 1;
        if (smp < n_samples_) {
          for (size_t r = 0; r < rcv_cells_.size(); ++r) {
            double g = gather_adjoint(smp, static_cast<int>(r));
            if (g == 0) continue;
            for (const auto& [p, w] : rcv_cells_[r]) avz[FIDX(p / nxp_, p % nxp_)] += w * g;
          }
        }
      }

      // D': free surface transpose
      if (free_surface_) {
        for (int j = 0; j < nxp; ++j) {
          atxz[FIDX(1, j)] -= atxz[FIDX(-2, j)];
          atxz[FIDX(-2, j)] = 0.0;
          atxz[FIDX(0, j)] -= atxz[FIDX(-1, j)];
          atxz[FIDX(-1, j)] = 0.0;
          atzz[FIDX(1, j)] -= atzz[FIDX(-1, j)];
          atzz[FIDX(-1, j)] = 0.0;
          atzz[FIDX(0, j)] = 0.0;
        }
      }

      // C': stress update transpose
      double* ex = s.ex.data();
      double* ez = s.ez.data();
      double* ea = s.exz_a.data();  // DzF(vx) path
      double* eb = s.exz_b.data();  // DxF(vz) path
      for (int i = 0; i < nzp; ++i)
        for (int j = 0; j < nxp; ++j) {
          size_t p = PIDX(i, j);
          size_t f = FIDX(i, j);
          double gxx = atxx[f], gzz = atzz[f], gxz = atxz[f];
          s.gl2m[p] += dt_ * (gxx * h_exx[p] + gzz * h_ezz[p]);
          s.glam[p] += dt_ * (gxx * h_ezz[p] + gzz * h_exx[p]);
          s.gmuh[p] += dt_ * gxz * h_exz[p];
          ex[f] = dt_ * (l2m_[p] * gxx + lam_[p] * gzz);
          ez[f] = dt_ * (lam_[p] * gxx + l2m_[p] * gzz);
          double e = dt_ * muh_[p] * gxz;
          ea[f] = e;
          eb[f] = e;
        }
      // CPML transpose in strips: psi' received the bracket adjoint; the raw
      // derivative adjoint gains a*psi_bar'; psi_bar decays by b
      auto strip_x_sT = [&](int j_begin, int j_end) {
        for (int i = 0; i < nzp; ++i)
          for (int j = j_begin; j < j_end; ++j) {
            size_t p = PIDX(i, j);
            size_t f = FIDX(i, j);
            double pb = s.apsi[4][p] + ex[f];  // p_vx_x
            ex[f] += ax_[j] * pb;
            s.apsi[4][p] = bxp_[j] * pb;
            pb = s.apsi[7][p] + eb[f];  // p_vz_x
            eb[f] += axh_[j] * pb;
            s.apsi[7][p] = bxph_[j] * pb;
          }
      };
      auto strip_z_sT = [&](int i_begin, int i_end) {
        for (int i = i_begin; i < i_end; ++i)
          for (int j = 0; j < nxp; ++j) {
            size_t p = PIDX(i, j);
            size_t f = FIDX(i, j);
            double pb = s.apsi[5][p] + ez[f];  // p_vz_z
            ez[f] += az_[i] * pb;
            s.apsi[5][p] = bzp_[i] * pb;
            pb = s.apsi[6][p] + ea[f];  // p_vx_z
            ea[f] += azh_[i] * pb;
            s.apsi[6][p] = bzph_[i] * pb;
          }
      };
      strip_x_sT(xl0, xl1);
      strip_x_sT(xr0, xr1);
      if (pad_top_ > 0) strip_z_sT(zt0, zt1);
      strip_z_sT(zb0, zb1);
      // scatter (as gathers with transposed stencils):
      //   sexx = DxB(vx)  ->  avx -= DxF(ex);   sezz = DzB(vz) -> avz -= DzF(ez)
      //   sexz = DzF(vx) + DxF(vz) -> avx -= DzB(ea); avz -= DxB(eb)
      for (int i = 0; i < nzp; ++i)
        for (int j = 0; j < nxp; ++j) {
          size_t f = FIDX(i, j);
          avx[f] -= (c1_ * (ex[f + 1] - ex[f]) + c2_ * (ex[f + 2] - ex[f - 1])) * ihx;
          avx[f] -= (c1_ * (ea[f] - ea[f - bsx_]) + c2_ * (ea[f + bsx_] - ea[f - 2 * bsx_])) * ihz;
          avz[f] -= (c1_ * (ez[f + bsx_] - ez[f]) + c2_ * (ez[f + 2 * bsx_] - ez[f - bsx_])) * ihz;
          avz[f] -= (c1_ * (eb[f] - eb[f - 1]) + c2_ * (eb[f + 1] - eb[f - 2])) * ihx;
        }

      // A': velocity update transpose. Brackets ex/ea reused: ex = x-part of
      // vx bracket, ea = z-part of vx bracket, ez = z-part of vz bracket,
      // eb = x-part of vz bracket.
      for (int i = 0; i < nzp; ++i)
        for (int j = 0; j < nxp; ++j) {
          size_t p = PIDX(i, j);
          size_t f = FIDX(i, j);
          s.gbx[p] += dt_ * avx[f] * h_svx[p];
          s.gbz[p] += dt_ * avz[f] * h_svz[p];
          double sx = dtbx_[p] * avx[f];
          double sz = dtbz_[p] * avz[f];
          ex[f] = sx;
          ea[f] = sx;
          ez[f] = sz;
          eb[f] = sz;
        }
      auto strip_x_vT = [&](int j_begin, int j_end) {
        for (int i = 0; i < nzp; ++i)
          for (int j = j_begin; j < j_end; ++j) {
            size_t p = PIDX(i, j);
            size_t f = FIDX(i, j);
            double pb = s.apsi[0][p] + ex[f];  // p_txx_x
            ex[f] += axh_[j] * pb;
            s.apsi[0][p] = bxph_[j] * pb;
            pb = s.apsi[2][p] + eb[f];  // p_txz_x
            eb[f] += ax_[j] * pb;
            s.apsi[2][p] = bxp_[j] * pb;
          }
      };
      auto strip_z_vT = [&](int i_begin, int i_end) {
        for (int i = i_begin; i < i_end; ++i)
          for (int j = 0; j < nxp; ++j) {
            size_t p = PIDX(i, j);
            size_t f = FIDX(i, j);
            double pb = s.apsi[1][p] + ea[f];  // p_txz_z
            ea[f] += az_[i] * pb;
            s.apsi[1][p] = bzp_[i] * pb;
            pb = s.apsi[3][p] + ez[f];  // p_tzz_z
            ez[f] += azh_[i] * pb;
            s.apsi[3][p] = bzph_[i] * pb;
          }
      };
      strip_x_vT(xl0, xl1);
      strip_x_vT(xr0, xr1);
      if (pad_top_ > 0) strip_z_vT(zt0, zt1);
      strip_z_vT(zb0, zb1);
      //   svx = DxF(txx) + DzB(txz) -> atxx -= DxB(ex);  atxz -= DzF(ea)
      //   svz = DxB(txz) + DzF(tzz) -> atxz -= DxF(eb);  atzz -= DzB(ez)
      for (int i = 0; i < nzp; ++i)
        for (int j = 0; j < nxp; ++j) {
          size_t f = FIDX(i, j);
          atxx[f] -= (c1_ * (ex[f] - ex[f - 1]) + c2_ * (ex[f + 1] - ex[f - 2])) * ihx;
          atxz[f] -= (c1_ * (ea[f + bsx_] - ea[f]) + c2_ * (ea[f + 2 * bsx_] - ea[f - bsx_])) * ihz;
          atxz[f] -= (c1_ * (eb[f + 1] - eb[f]) + c2_ * (eb[f + 2] - eb[f - 1])) * ihx;
          atzz[f] -= (c1_ * (ez[f] - ez[f - bsx_]) + c2_ * (ez[f + bsx_] - ez[f - 2 * bsx_])) * ihz;
        }
    }
  };

  if (history_full_) {
    reverse_range(nt_, 0, history_.data());
  } else {
    for (int w = static_cast<int>(checkpoints_.size()) - 1; w >= 0; --w) {
      int n_lo = w * checkpoint_every_;
      int n_hi = std::min(nt_, n_lo + checkpoint_every_);
      restore_state(checkpoints_[w]);
      for (int n = n_lo; n < n_hi; ++n) step(n, true, n - n_lo);
      reverse_range(n_hi, n_lo, history_.data());
    }
  }

  // fold staggered-parameter gradients back to per-cell (rho, lambda, mu)
  Array2Dd grho(nz_, nx_), glamc(nz_, nx_), gmuc(nz_, nx_);
  auto cell = [&](int i, int j) -> std::pair<int, int> {
    return {std::clamp(i - pad_top_, 0, nz_ - 1), std::clamp(j - pml_, 0, nx_ - 1)};
  };
  for (int i = 0; i < nzp; ++i)
    for (int j = 0; j < nxp; ++j) {
      size_t p = PIDX(i, j);
      // lambda + 2mu and lambda live on integer points: direct fold
      auto [ci, cj] = cell(i, j);
      glamc(ci, cj) += s.gl2m[p] + s.glam[p];
      gmuc(ci, cj) += 2.0 * s.gl2m[p];
      // b = 1/(0.5 (rho(c) + rho(c+)))  =>  d b / d rho = -0.5 b^2 each
      if (s.gbx[p] != 0.0) {
        double d = -0.5 * bx_[p] * bx_[p] * s.gbx[p];
        auto [ai, aj] = cell(i, j);
        auto [bi, bj] = cell(i, j + 1);
        grho(ai, aj) += d;
        grho(bi, bj) += d;
      }
      if (s.gbz[p] != 0.0) {
        double d = -0.5 * bz_[p] * bz_[p] * s.gbz[p];
        auto [ai, aj] = cell(i, j);
        auto [bi, bj] = cell(i + 1, j);
        grho(ai, aj) += d;
        grho(bi, bj) += d;
      }
      // mu at (i+1/2, j+1/2): 4-point average
      if (s.gmuh[p] != 0.0) {
        double d = 0.25 * s.gmuh[p];
        for (int di = 0; di <= 1; ++di)
          for (int dj = 0; dj <= 1; ++dj) {
            auto [ci2, cj2] = cell(i + di, j + dj);
            gmuc(ci2, cj2) += d;
          }
      }
    }

  MaterialGradients out;
  out.d_rho = std::move(grho);
  out.d_lambda = std::move(glamc);
  out.d_mu = std::move(gmuc);
  return out;
}

#undef FIDX
#undef PIDX

}  // namespace fwi::wavesim
