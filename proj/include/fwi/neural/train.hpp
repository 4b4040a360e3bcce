#pragma once

#include <functional>

#include "fwi/geomodel/dataset.hpp"
#include "fwi/neural/network.hpp"

namespace fwi::neural {

struct TrainConfig {
  int epochs = 250;
  int batch_size = 50;
  double lr = 1e-3;
  double lr_decay = 1.0;  // per-epoch multiplicative decay; 1.0 = constant lr
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  uint64_t seed = 0;

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (lr < 0) throw std::invalid_argument("TrainConfig: lr must be >= 0");
    if (lr_decay <= 0 || lr_decay > 1) throw std::invalid_argument("TrainConfig: lr_decay must be in (0,1]");
    if (adam_beta1 <= 0 || adam_beta1 >= 1 || adam_beta2 <= 0 || adam_beta2 >= 1)
      throw std::invalid_argument("TrainConfig: betas must be in (0,1)");
    if (adam_eps <= 0) throw std::invalid_argument("TrainConfig: adam_eps must be positive");
  }
};

// Mean absolute error over a batch: sum of |label - pred| per sample, divided
// by the batch size. Gradient w.r.t. pred; sign(0) = 0.
std::pair<double, std::vector<TensorF>> mae_loss(const std::vector<TensorF>& pred, const std::vector<TensorF>& label);

// One ADAM update with bias correction; throws on non-finite gradients.
void adam_step(NetworkState& net, const ParamGrads& grads, const TrainConfig& cfg);

// Full training loop: computes norm_stats from ds, then seeded shuffling and
// forward/backward/adam per batch. Returns per-epoch mean training loss.
// epoch_callback (optional) runs after each epoch.
std::vector<double> train(NetworkState& net, const geomodel::Dataset& ds, const TrainConfig& cfg,
                          const std::function<void(int epoch, double loss)>& epoch_callback = {});

// network_forward + clamp to velocity bounds.
geomodel::VelocityMap predict(const NetworkState& net, const wavesim::SurveyData& d,
                              const geomodel::VelocityBounds& bounds = {});

}  // namespace fwi::neural
