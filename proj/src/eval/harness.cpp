#include "fwi/eval/harness.hpp"

#include <cmath>

#include "fwi/core/rng.hpp"
#include "fwi/eval/metrics.hpp"

namespace fwi::eval {

const geomodel::Dataset& PartitionedData::by_tag(const std::string& tag) const {
  if (tag == "tiny") return tiny;
  if (tag == "small") return small;
  if (tag == "medium") return medium;
  if (tag == "large") return large;
  throw std::invalid_argument("PartitionedData: unknown partition " + tag);
}

namespace {

void append(geomodel::Dataset& dst, const geomodel::Dataset& src) {
  dst.entries.insert(dst.entries.end(), src.entries.begin(), src.entries.end());
}

geomodel::Dataset guard_labels(const geomodel::Dataset& src) {
  geomodel::Dataset out = src;
  for (auto& e : out.entries) e.label_guarded = true;
  return out;
}

// epsilon over a test set in normalized velocity units
double test_epsilon(const neural::NetworkState& net, const geomodel::Dataset& test,
                    const geomodel::VelocityBounds& bounds) {
  double span = net.norm.m_max - net.norm.m_min;
  std::vector<Array2Dd> preds, labels;
  preds.reserve(test.size());
  labels.reserve(test.size());
  for (const auto& e : test.entries) {
    geomodel::VelocityMap p = neural::predict(net, *e.gather, bounds);
    const geomodel::VelocityMap& l = e.label();
    Array2Dd pn(p.vp.rows(), p.vp.cols()), ln(p.vp.rows(), p.vp.cols());
    for (size_t k = 0; k < p.vp.size(); ++k) {
      pn.data()[k] = (p.vp.data()[k] - net.norm.m_min) / span;
      ln.data()[k] = (l.vp.data()[k] - net.norm.m_min) / span;
    }
    preds.push_back(std::move(pn));
    labels.push_back(std::move(ln));
  }
  return epsilon(preds, labels);
}

}  // namespace

EvalReport run_setup(const std::string& setup_id, const PartitionedData& data, const SetupConfig& cfg) {
  EvalReport rep;
  rep.setup_id = setup_id;
  rep.seed = cfg.seed;
  rep.config_digest = cfg.config_digest;

  geomodel::Dataset train_set;
  const geomodel::Dataset* test = nullptr;
  augment::AugmentConfig aug = cfg.aug;
  aug.arch = cfg.arch;
  aug.surrogate_train.seed = derive_seed(cfg.seed, 0x5A6u);

  if (setup_id == "i") {
    train_set = data.large;
    test = &data.tiny;
  } else if (setup_id == "ii") {
    train_set = data.large;
    append(train_set, data.medium);
    test = &data.tiny;
  } else if (setup_id == "iii") {
    train_set = data.large;
    append(train_set, data.medium);
    append(train_set, data.small);
    test = &data.tiny;
  } else if (setup_id == "iv") {
    geomodel::Dataset labeled = data.large;
    append(labeled, data.medium);
    aug.keep_original_labels = true;
    train_set = augment::augment_iterative(labeled, data.medium, aug, cfg.bundle).dataset;
    test = &data.tiny;
  } else if (setup_id == "u1") {
    train_set = data.large;
    test = &data.small;
  } else if (setup_id == "u2") {
    geomodel::Dataset unlabeled = guard_labels(data.medium);
    aug.keep_original_labels = false;
    train_set = augment::augment_iterative(data.large, unlabeled, aug, cfg.bundle).dataset;
    test = &data.small;
  } else {
    throw std::invalid_argument("run_setup: unknown setup " + setup_id);
  }
  if (test->empty() || train_set.empty()) throw std::invalid_argument("run_setup: missing partition data");
  rep.train_size = static_cast<int>(train_set.size());
  rep.test_size = static_cast<int>(test->size());

  neural::NetworkState net = neural::build_network(cfg.arch, derive_seed(cfg.seed, 0x90D0u));
  neural::TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.seed, 0x7124Eu);
  rep.per_epoch_loss = neural::train(net, train_set, tc, [&](int, double) {
    rep.per_epoch_epsilon.push_back(test_epsilon(net, *test, cfg.bounds));
  });
  rep.final_epsilon = rep.per_epoch_epsilon.back();

  double span = net.norm.m_max - net.norm.m_min;
  for (const auto& e : test->entries) {
    geomodel::VelocityMap p = neural::predict(net, *e.gather, cfg.bounds);
    const geomodel::VelocityMap& l = e.label();
    double mae = 0;
    for (size_t k = 0; k < p.vp.size(); ++k) mae += std::abs(p.vp.data()[k] - l.vp.data()[k]);
    mae /= static_cast<double>(p.vp.size()) * span;
    double s = ssim(p.vp, l.vp, net.norm.m_min, net.norm.m_max);
    rep.per_sample.push_back({e.scenario_id, mae, s});
    rep.aggregate_mae += mae;
    rep.aggregate_ssim += s;
  }
  rep.aggregate_mae /= rep.test_size;
  rep.aggregate_ssim /= rep.test_size;
  return rep;
}

}  // namespace fwi::eval
