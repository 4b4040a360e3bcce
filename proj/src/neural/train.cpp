#include "fwi/neural/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fwi/core/rng.hpp"

namespace fwi::neural {

std::pair<double, std::vector<TensorF>> mae_loss(const std::vector<TensorF>& pred, const std::vector<TensorF>& label) {
  if (pred.size() != label.size() || pred.empty()) throw std::invalid_argument("mae_loss: batch size mismatch");
  const double inv_l = 1.0 / static_cast<double>(pred.size());
  double loss = 0;
  std::vector<TensorF> grad(pred.size());
  for (size_t s = 0; s < pred.size(); ++s) {
    if (!pred[s].same_dims(label[s])) throw std::invalid_argument("mae_loss: sample shape mismatch");
    grad[s] = TensorF(pred[s].dims);
    for (size_t k = 0; k < pred[s].size(); ++k) {
      double diff = static_cast<double>(label[s].data[k]) - static_cast<double>(pred[s].data[k]);
      loss += std::abs(diff) * inv_l;
      grad[s].data[k] = diff > 0 ? static_cast<float>(-inv_l) : diff < 0 ? static_cast<float>(inv_l) : 0.0f;
    }
  }
  return {loss, std::move(grad)};
}

void adam_step(NetworkState& net, const ParamGrads& grads, const TrainConfig& cfg) {
  cfg.validate();
  if (grads.gw.size() != net.layers.size()) throw std::invalid_argument("adam_step: gradient layout mismatch");
  net.step_count += 1;
  const double t = static_cast<double>(net.step_count);
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, t);
  auto update = [&](TensorF& p, TensorF& m, TensorF& v, const TensorF& g, const char* what) {
    if (!p.same_dims(g)) throw std::invalid_argument(std::string("adam_step: shape mismatch in ") + what);
    for (size_t k = 0; k < p.size(); ++k) {
      double gk = g.data[k];
      if (!std::isfinite(gk)) throw std::runtime_error(std::string("adam_step: non-finite gradient in ") + what);
      double mk = cfg.adam_beta1 * m.data[k] + (1 - cfg.adam_beta1) * gk;
      double vk = cfg.adam_beta2 * v.data[k] + (1 - cfg.adam_beta2) * gk * gk;
      m.data[k] = static_cast<float>(mk);
      v.data[k] = static_cast<float>(vk);
      p.data[k] -= static_cast<float>(cfg.lr * (mk / bc1) / (std::sqrt(vk / bc2) + cfg.adam_eps));
    }
  };
  for (size_t i = 0; i < net.layers.size(); ++i) {
    if (!net.layers[i].has_params()) continue;
    update(net.weights[i], net.adam_mw[i], net.adam_vw[i], grads.gw[i], "weights");
    update(net.biases[i], net.adam_mb[i], net.adam_vb[i], grads.gb[i], "biases");
  }
}

namespace {

TensorF label_to_tensor(const NetworkState& net, const geomodel::VelocityMap& m) {
  if (m.vp.rows() != net.arch.out_rows || m.vp.cols() != net.arch.out_cols)
    throw std::invalid_argument("train: label dims disagree with the architecture");
  TensorF t({1, net.arch.out_rows, net.arch.out_cols});
  double span = net.norm.m_max - net.norm.m_min;
  if (span <= 0) span = 1;
  for (size_t k = 0; k < t.size(); ++k)
    t.data[k] = static_cast<float>((m.vp.data()[k] - net.norm.m_min) / span);
  return t;
}

NormStats compute_norm_stats(const geomodel::Dataset& ds) {
  NormStats n;
  n.d_min = n.m_min = std::numeric_limits<double>::infinity();
  n.d_max = n.m_max = -std::numeric_limits<double>::infinity();
  for (const auto& e : ds.entries) {
    if (!e.gather) throw std::invalid_argument("train: entry without gather");
    for (const auto& g : e.gather->gathers)
      for (double v : g.data.raw()) {
        n.d_min = std::min(n.d_min, v);
        n.d_max = std::max(n.d_max, v);
      }
    const geomodel::VelocityMap& m = e.label();
    for (double v : m.vp.raw()) {
      n.m_min = std::min(n.m_min, v);
      n.m_max = std::max(n.m_max, v);
    }
  }
  if (n.d_max <= n.d_min) n.d_max = n.d_min + 1;
  if (n.m_max <= n.m_min) n.m_max = n.m_min + 1;
  return n;
}

}  // namespace

std::vector<double> train(NetworkState& net, const geomodel::Dataset& ds, const TrainConfig& cfg,
                          const std::function<void(int epoch, double loss)>& epoch_callback) {
  cfg.validate();
  if (ds.empty()) throw std::invalid_argument("train: empty dataset");
  net.norm = compute_norm_stats(ds);

  const int n = static_cast<int>(ds.size());
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> history;
  history.reserve(static_cast<size_t>(cfg.epochs));

  TrainConfig step_cfg = cfg;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    step_cfg.lr = cfg.lr * std::pow(cfg.lr_decay, epoch);
    Rng rng(derive_seed(cfg.seed, 0xE90C000u + static_cast<uint64_t>(epoch)));
    rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0;
    for (int b0 = 0; b0 < n; b0 += cfg.batch_size) {
      int bsz = std::min(cfg.batch_size, n - b0);
      std::vector<std::vector<TensorF>> caches(static_cast<size_t>(bsz));
      std::vector<TensorF> preds(static_cast<size_t>(bsz)), labels(static_cast<size_t>(bsz));
#pragma omp parallel for schedule(dynamic)
      for (int s = 0; s < bsz; ++s) {
        const auto& e = ds.entries[static_cast<size_t>(order[static_cast<size_t>(b0 + s)])];
        preds[static_cast<size_t>(s)] =
            network_forward_cached(net, gather_to_input(net, *e.gather), &caches[static_cast<size_t>(s)]);
        labels[static_cast<size_t>(s)] = label_to_tensor(net, e.label());
      }
      auto [loss, loss_grads] = mae_loss(preds, labels);
      std::vector<ParamGrads> sample_grads(static_cast<size_t>(bsz));
#pragma omp parallel for schedule(dynamic)
      for (int s = 0; s < bsz; ++s)
        sample_grads[static_cast<size_t>(s)] =
            network_backward(net, caches[static_cast<size_t>(s)], loss_grads[static_cast<size_t>(s)]);
      // fixed-order reduction keeps training independent of the worker count
      ParamGrads total;
      for (int s = 0; s < bsz; ++s) total.accumulate(sample_grads[static_cast<size_t>(s)]);
      adam_step(net, total, step_cfg);
      epoch_loss += loss * bsz;
    }
    epoch_loss /= n;
    history.push_back(epoch_loss);
    if (epoch_callback) epoch_callback(epoch, epoch_loss);
  }
  return history;
}

geomodel::VelocityMap predict(const NetworkState& net, const wavesim::SurveyData& d,
                              const geomodel::VelocityBounds& bounds) {
  geomodel::VelocityMap m = network_forward(net, d);
  for (auto& v : m.vp.raw()) v = std::clamp(v, bounds.v_min, bounds.v_max);
  return m;
}

}  // namespace fwi::neural
