#include "fwi/augment/augment.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "fwi/core/rng.hpp"
#include "fwi/wavesim/simulate.hpp"

namespace fwi::augment {

namespace {

// Deterministic labeled/holdout split for the monitoring MAE.
void split_holdout(const geomodel::Dataset& labeled, double fraction, uint64_t seed, geomodel::Dataset& train,
                   geomodel::Dataset& holdout) {
  std::vector<int> order(labeled.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x401D0u));
  rng.shuffle(order.begin(), order.end());
  size_t n_hold = static_cast<size_t>(fraction * static_cast<double>(labeled.size()));
  if (n_hold >= labeled.size()) n_hold = labeled.size() - 1;
  std::vector<bool> held(labeled.size(), false);
  for (size_t k = 0; k < n_hold; ++k) held[static_cast<size_t>(order[k])] = true;
  train.partition = holdout.partition = labeled.partition;
  for (size_t k = 0; k < labeled.size(); ++k)
    (held[k] ? holdout : train).entries.push_back(labeled.entries[k]);
}

double holdout_mae(const neural::NetworkState& net, const geomodel::Dataset& holdout,
                   const geomodel::VelocityBounds& bounds) {
  if (holdout.empty()) return 0;
  double acc = 0;
  size_t cells = 0;
  for (const auto& e : holdout.entries) {
    geomodel::VelocityMap pred = neural::predict(net, *e.gather, bounds);
    const geomodel::VelocityMap& lab = e.label();
    for (size_t k = 0; k < pred.vp.size(); ++k) acc += std::abs(pred.vp.data()[k] - lab.vp.data()[k]);
    cells += pred.vp.size();
  }
  return acc / static_cast<double>(cells);
}

// One round against an explicit training pool; appends/replaces pseudo-pairs
// tagged with `round`.
AugmentResult run_one_round(const geomodel::Dataset& pool, const geomodel::Dataset& unlabeled,
                            const AugmentConfig& cfg, const physfwi::SimBundle& bundle, int round,
                            bool replace_augmented) {
  AugmentResult res;
  geomodel::Dataset train_split, holdout;
  split_holdout(pool, cfg.validation_fraction, cfg.surrogate_train.seed, train_split, holdout);

  res.surrogate = neural::build_network(cfg.arch, derive_seed(cfg.surrogate_train.seed, 0x5E70000u + round));
  neural::TrainConfig tc = cfg.surrogate_train;
  tc.seed = derive_seed(cfg.surrogate_train.seed, 0x7124E000u + round);
  neural::train(res.surrogate, train_split.empty() ? pool : train_split, tc);
  res.round_validation_mae.push_back(holdout_mae(res.surrogate, holdout, cfg.bounds));

  res.dataset.partition = pool.partition;
  res.dataset.entries = pool.entries;
  if (replace_augmented)
    // round-k pseudo-pairs supersede round-(k-1) ones
    std::erase_if(res.dataset.entries,
                  [](const geomodel::DatasetEntry& e) { return e.provenance.rfind("augmented", 0) == 0; });
  std::string tag = "augmented@round_" + std::to_string(round);
  for (const auto& u : unlabeled.entries) {
    if (!u.gather) throw std::invalid_argument("augment_round: unlabeled entry without gather");
    geomodel::VelocityMap pseudo = neural::predict(res.surrogate, *u.gather, cfg.bounds);
    wavesim::SurveyData resim;
    try {
      resim = wavesim::simulate_shots(pseudo, bundle.geometry, bundle.wavelet, bundle.sim);
    } catch (const std::exception& ex) {
      std::fprintf(stderr, "augment: skipping scenario %d (%s)\n", u.scenario_id, ex.what());
      res.skipped_scenarios.push_back(u.scenario_id);
      continue;
    }
    geomodel::DatasetEntry e;
    e.scenario_id = u.scenario_id;
    e.partition_tag = u.partition_tag;
    e.provenance = cfg.provenance_tagging ? tag : "augmented";
    e.plume_mass_proxy = u.plume_mass_proxy;
    e.label_value = std::move(pseudo);
    e.gather = std::move(resim);
    if (!cfg.keep_original_labels) {
      // pseudo-pair supersedes any labeled duplicate of this scenario
      std::erase_if(res.dataset.entries, [&](const geomodel::DatasetEntry& d) {
        return d.scenario_id == e.scenario_id && d.provenance == "original";
      });
    }
    res.dataset.entries.push_back(std::move(e));
  }
  return res;
}

}  // namespace

AugmentResult augment_round(const geomodel::Dataset& labeled, const geomodel::Dataset& unlabeled,
                            const AugmentConfig& cfg, const physfwi::SimBundle& bundle) {
  cfg.validate();
  if (labeled.empty()) throw std::invalid_argument("augment_round: labeled set is empty");
  return run_one_round(labeled, unlabeled, cfg, bundle, 1, false);
}

AugmentResult augment_iterative(const geomodel::Dataset& labeled, const geomodel::Dataset& unlabeled,
                                const AugmentConfig& cfg, const physfwi::SimBundle& bundle) {
  cfg.validate();
  if (labeled.empty()) throw std::invalid_argument("augment_iterative: labeled set is empty");
  geomodel::Dataset pool = labeled;
  AugmentResult last;
  std::vector<double> mae_per_round;
  for (int r = 1; r <= cfg.rounds; ++r) {
    last = run_one_round(pool, unlabeled, cfg, bundle, r, true);
    mae_per_round.push_back(last.round_validation_mae.back());
    pool = last.dataset;
  }
  last.round_validation_mae = std::move(mae_per_round);
  return last;
}

}  // namespace fwi::augment
