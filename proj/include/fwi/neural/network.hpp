#pragma once

#include <cstdint>
#include <vector>

#include "fwi/geomodel/types.hpp"
#include "fwi/neural/layers.hpp"
#include "fwi/wavesim/types.hpp"

namespace fwi::neural {

// Global min-max normalization, computed from training data only.
struct NormStats {
  double d_min = 0, d_max = 1;  // seismogram amplitudes
  double m_min = 0, m_max = 1;  // velocities, m/s
};

struct ArchitectureSpec {
  int n_sources = 1;    // input channels S
  int t_samples = 1;    // input rows T (recorded samples)
  int n_receivers = 1;  // input cols R
  int out_rows = 1;     // M (depth cells)
  int out_cols = 1;     // N (lateral cells)
  double dz = 10.0, dx = 10.0;
  std::vector<int> encoder_widths = {16, 32, 64, 128, 256};
  std::vector<int> decoder_widths = {128, 64, 32, 16, 16};

  void validate() const;
};

struct NetworkState {
  ArchitectureSpec arch;
  std::vector<LayerSpec> layers;
  // per-layer parameter tensors; empty for layers without parameters
  std::vector<TensorF> weights, biases;
  std::vector<TensorF> adam_mw, adam_vw, adam_mb, adam_vb;
  long step_count = 0;
  NormStats norm;
};

// Encoder-decoder network: stride-2 conv blocks collapse the gather to a
// 1x1 latent, transposed-conv blocks grow it back to (M, N).
NetworkState build_network(const ArchitectureSpec& arch, uint64_t seed);

// Raw tensor pass on a normalized (S, T, R) input; returns (1, M, N). When
// cache is non-null, each layer's input is stored for the backward pass.
TensorF network_forward_cached(const NetworkState& net, const TensorF& input, std::vector<TensorF>* cache);

struct ParamGrads {
  std::vector<TensorF> gw, gb;  // aligned with net.layers
  void accumulate(const ParamGrads& other);
};

// Gradient of every parameter given d(loss)/d(output); cache from the
// matching forward call.
ParamGrads network_backward(const NetworkState& net, const std::vector<TensorF>& cache, const TensorF& grad_out);

// SurveyData in, de-normalized VelocityMap out (no bounds clamp here).
geomodel::VelocityMap network_forward(const NetworkState& net, const wavesim::SurveyData& d);

// Builds the normalized input tensor for a gather.
TensorF gather_to_input(const NetworkState& net, const wavesim::SurveyData& d);

// Checkpoint: manifest plus one FWI1 container per parameter tensor.
void save_checkpoint(const NetworkState& net, const std::string& dir);
NetworkState load_checkpoint(const std::string& dir);

}  // namespace fwi::neural
