#pragma once

#include <string>

#include "fwi/augment/augment.hpp"

namespace fwi::eval {

struct PartitionedData {
  geomodel::Dataset tiny, small, medium, large;

  const geomodel::Dataset& by_tag(const std::string& tag) const;
};

struct SetupConfig {
  neural::ArchitectureSpec arch;
  neural::TrainConfig train;     // the evaluated network
  augment::AugmentConfig aug;    // surrogate settings for setups iv / u2
  physfwi::SimBundle bundle;     // geometry + wavelet + solver for re-simulation
  geomodel::VelocityBounds bounds;
  uint64_t seed = 0;
  std::string config_digest;
};

struct EvalReport {
  std::string setup_id;
  uint64_t seed = 0;
  int test_size = 0;
  int train_size = 0;
  std::vector<double> per_epoch_epsilon;  // test-set epsilon after every epoch
  std::vector<double> per_epoch_loss;     // training loss per epoch
  struct SampleScore {
    int scenario_id;
    double mae;   // per-pixel normalized MAE
    double ssim;
  };
  std::vector<SampleScore> per_sample;
  double final_epsilon = 0;
  double aggregate_mae = 0, aggregate_ssim = 0;
  std::string config_digest;
};

// Training compositions: (i) large, (ii) large+medium, (iii)
// large+medium+small, (iv) large+medium+augmented-medium, tested on tiny;
// (u1) large, (u2) large+augmented-medium-with-guarded-labels, tested on
// small. u2 trips the label guard if any medium label is ever read.
EvalReport run_setup(const std::string& setup_id, const PartitionedData& data, const SetupConfig& cfg);

// curve.csv (epoch, epsilon, ln_epsilon), samples.csv (scenario_id, mae,
// ssim), summary.txt; byte-stable across re-emissions.
void emit_report(const EvalReport& report, const std::string& out_dir);

}  // namespace fwi::eval
