#pragma once

#include <vector>

#include "fwi/core/array.hpp"
#include "fwi/geomodel/types.hpp"
#include "fwi/wavesim/types.hpp"

namespace fwi::wavesim {

// Single-shot velocity-stress staggered-grid engine (Virieux layout) with
// CPML strips and an optional free surface at the top.
//
// Staggering, in interior grid units (i = depth row, j = lateral column):
//   txx, tzz at (i, j)          vx at (i, j+1/2)
//   vz at (i+1/2, j)            txz at (i+1/2, j+1/2)
//
// Every update is written as  field += coeff .* bracket  where the bracket
// (effective spatial derivative incl. CPML memory and source term) is formed
// in a scratch pass first. The adjoint pass is the exact transpose of these
// updates, so the gradient of a sampled-gather functional matches finite
// differences of the discrete forward solver to rounding error.
class ShotEngine {
 public:
  ShotEngine(const geomodel::ElasticModel& model, const geomodel::AcquisitionGeometry& geometry, int source_index,
             const SourceWavelet& wavelet, const SimConfig& cfg);

  // Forward run. With record_history, per-step brackets are kept for a later
  // run_adjoint (falling back to checkpoint/replay above the memory budget).
  ShotGather run_forward(bool record_history = false);

  struct MaterialGradients {
    Array2Dd d_rho, d_lambda, d_mu;  // (nz, nx), per interior model cell
  };

  // Back-propagates d(J)/d(gather sample) through the recorded simulation.
  MaterialGradients run_adjoint(const Array2Dd& gather_adjoint);

  int nt() const { return nt_; }
  int n_samples() const { return n_samples_; }

  // interior-window energy (sum of vx^2+vz^2 over the physical domain); test hook
  double interior_kinetic_energy() const;
  bool record_interior_energy = false;
  std::vector<double> interior_energy;  // per step, when requested

 private:
  // full field + CPML memory snapshot, for checkpoint replay
  struct State {
    std::vector<double> vx, vz, txx, tzz, txz;
    std::vector<double> psi[8];
  };

  void step(int n, bool record, int hist_slot);
  void record_sample(int s);
  State capture_state() const;
  void restore_state(const State& s);
  void ensure_history();

  // geometry of the padded grid
  int nz_, nx_;          // interior cells
  int pad_top_, pml_;    // pad_top_ = 0 with a free surface, else pml_
  int nzp_, nxp_;        // padded cells
  int bsx_;              // buffer row stride (nxp_ + 2 halo)
  double dx_, dz_, dt_;
  int nt_, decim_, n_samples_;
  double c1_, c2_;  // FD stencil coefficients / spacing applied separately
  bool free_surface_;
  size_t memory_budget_;

  // material coefficient arrays, padded coords (nzp_ x nxp_)
  std::vector<double> dtbx_, dtbz_;  // dt / rho at vx / vz points
  std::vector<double> l2m_, lam_, muh_;
  std::vector<double> bx_, bz_;  // buoyancies themselves (for rho gradients)

  // CPML recursion constants per padded index, integer and half positions
  std::vector<double> ax_, bxp_, axh_, bxph_;
  std::vector<double> az_, bzp_, azh_, bzph_;

  // fields with halo
  std::vector<double> vx_, vz_, txx_, tzz_, txz_;
  // CPML memory variables, padded coords (zero outside strips)
  std::vector<double> p_txx_x_, p_txz_z_, p_txz_x_, p_tzz_z_;
  std::vector<double> p_vx_x_, p_vz_z_, p_vx_z_, p_vz_x_;

  // per-step scratch brackets, padded coords
  std::vector<double> svx_, svz_, sexx_, sezz_, sexz_;

  // source / receivers as (padded flat index, weight) pairs on the vz grid
  std::vector<std::pair<int, double>> src_cells_;
  std::vector<std::vector<std::pair<int, double>>> rcv_cells_;
  std::vector<double> wavelet_samples_;

  ShotGather gather_;

  // adjoint history
  bool history_full_ = false;
  int checkpoint_every_ = 10;
  std::vector<double> history_;       // nt x 5 x (nzp*nxp) when full
  std::vector<State> checkpoints_;    // when checkpointing
  bool have_history_ = false;
};

}  // namespace fwi::wavesim
