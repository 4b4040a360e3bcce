#pragma once

#include "fwi/geomodel/dataset.hpp"
#include "fwi/neural/train.hpp"
#include "fwi/physfwi/objective.hpp"

namespace fwi::augment {

struct AugmentConfig {
  int rounds = 1;
  neural::TrainConfig surrogate_train;
  neural::ArchitectureSpec arch;
  bool keep_original_labels = true;   // false: pseudo-pairs replace labeled duplicates
  bool provenance_tagging = true;
  double validation_fraction = 0.1;   // labeled holdout for the per-round monitoring MAE
  geomodel::VelocityBounds bounds;

  void validate() const {
    if (rounds < 1) throw std::invalid_argument("AugmentConfig: rounds must be >= 1");
    if (validation_fraction < 0 || validation_fraction >= 1)
      throw std::invalid_argument("AugmentConfig: validation_fraction must be in [0,1)");
    surrogate_train.validate();
  }
};

struct AugmentResult {
  geomodel::Dataset dataset;               // labeled entries plus tagged pseudo-pairs
  std::vector<double> round_validation_mae;  // per-pixel MAE (m/s) on the labeled holdout, one per round
  std::vector<int> skipped_scenarios;      // pseudo-labels whose re-simulation failed
  neural::NetworkState surrogate;          // last round's surrogate network
};

// One round of physics-consistent augmentation: train a surrogate on
// `labeled`, pseudo-label every gather in `unlabeled`, re-simulate each
// pseudo-label through the forward model, and append the resulting pairs.
// A failing simulation skips that entry, never the round.
AugmentResult augment_round(const geomodel::Dataset& labeled, const geomodel::Dataset& unlabeled,
                            const AugmentConfig& cfg, const physfwi::SimBundle& bundle);

// Repeats augment_round; each round re-trains the surrogate on the current
// extended set and its pseudo-pairs replace the previous round's for the same
// scenario_id.
AugmentResult augment_iterative(const geomodel::Dataset& labeled, const geomodel::Dataset& unlabeled,
                                const AugmentConfig& cfg, const physfwi::SimBundle& bundle);

}  // namespace fwi::augment
