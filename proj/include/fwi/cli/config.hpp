#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fwi/augment/augment.hpp"
#include "fwi/geomodel/generate.hpp"
#include "fwi/neural/network.hpp"
#include "fwi/physfwi/invert.hpp"

namespace fwi::cli {

// Configuration or command-line usage problem; maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All tunables of every workflow, loaded from a line-oriented
// "section.key = value" file. Unknown keys are hard errors.
struct RunConfig {
  uint64_t seed = 1;
  std::string out_dir = "runs";
  int threads = 0;  // 0 = library default; 1 = bit-deterministic

  geomodel::GridSpec grid{71, 171, 10.0, 10.0};
  geomodel::DatasetGenConfig data;

  // acquisition: sources/receivers spread along the top of the model
  int n_sources = 3;
  int n_receivers = 48;
  double source_depth = 5.0;     // m
  double receiver_depth = 20.0;  // m
  double record_time = 1.0;      // s
  double dt = 0;                 // s; 0 = derive from vmax_hint and CFL
  int record_decimation = 4;
  double vmax_hint = 3500.0;  // stability headroom for auto dt

  wavesim::SourceWavelet wavelet;
  wavesim::SimConfig sim;

  neural::TrainConfig train;
  std::vector<int> encoder_widths = {16, 32, 64, 128, 256};
  std::vector<int> decoder_widths = {128, 64, 32, 16, 16};

  physfwi::FwiObjectiveConfig fwi;
  physfwi::InvertOptions invert;

  int augment_rounds = 1;
  bool keep_original_labels = true;
  double validation_fraction = 0.1;
  int surrogate_epochs = 0;  // 0 = same as train.epochs

  geomodel::VelocityBounds bounds;

  std::string digest;  // FNV-1a over the sorted key=value pairs

  geomodel::AcquisitionGeometry make_geometry() const;
  physfwi::SimBundle make_bundle() const;
  neural::ArchitectureSpec make_arch() const;
  augment::AugmentConfig make_augment_config() const;
};

RunConfig default_config();

// Parse, default, validate. `path` empty → pure defaults.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<memory>");

}  // namespace fwi::cli
