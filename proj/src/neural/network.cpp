#include "fwi/neural/network.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fwi/core/container.hpp"
#include "fwi/core/rng.hpp"

namespace fwi::neural {

void ArchitectureSpec::validate() const {
  if (n_sources < 1 || t_samples < 1 || n_receivers < 1)
    throw std::invalid_argument("ArchitectureSpec: input dims must be positive");
  if (out_rows < 1 || out_cols < 1) throw std::invalid_argument("ArchitectureSpec: output dims must be positive");
  if (encoder_widths.size() != 5 || decoder_widths.size() != 5)
    throw std::invalid_argument("ArchitectureSpec: expected 5 encoder and 5 decoder widths");
  for (int w : encoder_widths)
    if (w < 1) throw std::invalid_argument("ArchitectureSpec: widths must be positive");
  for (int w : decoder_widths)
    if (w < 1) throw std::invalid_argument("ArchitectureSpec: widths must be positive");
  if (dz <= 0 || dx <= 0) throw std::invalid_argument("ArchitectureSpec: cell sizes must be positive");
}

namespace {

LayerSpec conv(int cin, int cout, int kh, int kw, int sh, int sw, int ph, int pw) {
  LayerSpec s;
  s.kind = LayerKind::conv2d;
  s.channels_in = cin;
  s.channels_out = cout;
  s.kh = kh; s.kw = kw; s.sh = sh; s.sw = sw; s.ph = ph; s.pw = pw;
  return s;
}

LayerSpec tconv(int cin, int cout, int kh, int kw, int sh, int sw, int ph, int pw) {
  LayerSpec s = conv(cin, cout, kh, kw, sh, sw, ph, pw);
  s.kind = LayerKind::transposed_conv2d;
  return s;
}

LayerSpec relu() {
  LayerSpec s;
  s.kind = LayerKind::leaky_relu;
  s.leak = 0.01;
  return s;
}

std::vector<LayerSpec> build_layers(const ArchitectureSpec& a) {
  const auto& ew = a.encoder_widths;
  const auto& dw = a.decoder_widths;
  std::vector<LayerSpec> L;
  // encoder: temporal 7x1 first, then 3x3 stride-2 blocks
  L.push_back(conv(a.n_sources, ew[0], 7, 1, 2, 1, 3, 0));
  L.push_back(relu());
  for (int i = 1; i < 5; ++i) {
    L.push_back(conv(ew[i - 1], ew[i], 3, 3, 2, 2, 1, 1));
    L.push_back(relu());
  }
  // collapse whatever spatial extent remains into a 1x1 latent
  std::vector<int> d{a.n_sources, a.t_samples, a.n_receivers};
  for (const auto& s : L) d = s.out_dims(d);
  L.push_back(conv(ew[4], ew[4], d[1], d[2], 1, 1, 0, 0));
  L.push_back(relu());
  // decoder: one tconv to a 1/16-scale base, then four exact doublings
  int bh = (a.out_rows + 15) / 16, bw = (a.out_cols + 15) / 16;
  L.push_back(tconv(ew[4], dw[0], bh, bw, 1, 1, 0, 0));
  L.push_back(relu());
  for (int i = 1; i < 5; ++i) {
    L.push_back(tconv(dw[i - 1], dw[i], 4, 4, 2, 2, 1, 1));
    L.push_back(relu());
  }
  LayerSpec crop;
  crop.kind = LayerKind::reshape;
  crop.target_dims = {dw[4], a.out_rows, a.out_cols};
  L.push_back(crop);
  L.push_back(conv(dw[4], 1, 1, 1, 1, 1, 0, 0));
  return L;
}

}  // namespace

NetworkState build_network(const ArchitectureSpec& arch, uint64_t seed) {
  arch.validate();
  NetworkState net;
  net.arch = arch;
  net.layers = build_layers(arch);
  size_t n = net.layers.size();
  net.weights.resize(n);
  net.biases.resize(n);
  net.adam_mw.resize(n);
  net.adam_vw.resize(n);
  net.adam_mb.resize(n);
  net.adam_vb.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const LayerSpec& s = net.layers[i];
    if (!s.has_params()) continue;
    std::vector<int> wd = s.kind == LayerKind::conv2d
                              ? std::vector<int>{s.channels_out, s.channels_in, s.kh, s.kw}
                              : std::vector<int>{s.channels_in, s.channels_out, s.kh, s.kw};
    net.weights[i] = TensorF(wd);
    net.biases[i] = TensorF({s.channels_out});
    net.adam_mw[i] = TensorF(wd);
    net.adam_vw[i] = TensorF(wd);
    net.adam_mb[i] = TensorF({s.channels_out});
    net.adam_vb[i] = TensorF({s.channels_out});
    Rng rng(derive_seed(seed, 0xA110C000u + i));
    double scale = std::sqrt(2.0 / (static_cast<double>(s.channels_in) * s.kh * s.kw));
    for (auto& v : net.weights[i].data) v = static_cast<float>(scale * rng.normal());
  }
  return net;
}

TensorF network_forward_cached(const NetworkState& net, const TensorF& input, std::vector<TensorF>* cache) {
  if (input.dims != std::vector<int>{net.arch.n_sources, net.arch.t_samples, net.arch.n_receivers})
    throw std::invalid_argument("network_forward: input dims disagree with the architecture");
  TensorF x = input;
  if (cache) cache->clear();
  for (size_t i = 0; i < net.layers.size(); ++i) {
    if (cache) cache->push_back(x);
    const LayerSpec& s = net.layers[i];
    switch (s.kind) {
      case LayerKind::conv2d: x = conv2d_forward(x, net.weights[i], net.biases[i], s); break;
      case LayerKind::transposed_conv2d: x = tconv2d_forward(x, net.weights[i], net.biases[i], s); break;
      case LayerKind::leaky_relu: x = leaky_relu_forward(x, s.leak); break;
      case LayerKind::reshape: x = reshape_forward(x, s); break;
    }
  }
  return x;
}

void ParamGrads::accumulate(const ParamGrads& other) {
  if (gw.empty()) {
    gw = other.gw;
    gb = other.gb;
    return;
  }
  for (size_t i = 0; i < gw.size(); ++i) {
    for (size_t k = 0; k < gw[i].size(); ++k) gw[i].data[k] += other.gw[i].data[k];
    for (size_t k = 0; k < gb[i].size(); ++k) gb[i].data[k] += other.gb[i].data[k];
  }
}

ParamGrads network_backward(const NetworkState& net, const std::vector<TensorF>& cache, const TensorF& grad_out) {
  if (cache.size() != net.layers.size()) throw std::invalid_argument("network_backward: cache mismatch");
  ParamGrads g;
  g.gw.resize(net.layers.size());
  g.gb.resize(net.layers.size());
  TensorF gy = grad_out;
  for (size_t ii = net.layers.size(); ii-- > 0;) {
    const LayerSpec& s = net.layers[ii];
    const TensorF& x = cache[ii];
    switch (s.kind) {
      case LayerKind::conv2d: {
        TensorF gx;
        conv2d_backward(x, net.weights[ii], gy, s, gx, g.gw[ii], g.gb[ii]);
        gy = std::move(gx);
        break;
      }
      case LayerKind::transposed_conv2d: {
        TensorF gx;
        tconv2d_backward(x, net.weights[ii], gy, s, gx, g.gw[ii], g.gb[ii]);
        gy = std::move(gx);
        break;
      }
      case LayerKind::leaky_relu: gy = leaky_relu_backward(x, gy, s.leak); break;
      case LayerKind::reshape: gy = reshape_backward(x, gy, s); break;
    }
  }
  return g;
}

TensorF gather_to_input(const NetworkState& net, const wavesim::SurveyData& d) {
  const ArchitectureSpec& a = net.arch;
  if (d.n_shots() != a.n_sources) throw std::invalid_argument("gather_to_input: source count mismatch");
  TensorF x({a.n_sources, a.t_samples, a.n_receivers});
  double span = net.norm.d_max - net.norm.d_min;
  if (span <= 0) span = 1;
  for (int s = 0; s < a.n_sources; ++s) {
    const Array2Dd& g = d.gathers[static_cast<size_t>(s)].data;
    if (g.rows() != a.t_samples || g.cols() != a.n_receivers)
      throw std::invalid_argument("gather_to_input: gather dims disagree with the architecture");
    for (int t = 0; t < g.rows(); ++t)
      for (int r = 0; r < g.cols(); ++r)
        x.data[(static_cast<size_t>(s) * a.t_samples + t) * a.n_receivers + r] =
            static_cast<float>((g(t, r) - net.norm.d_min) / span);
  }
  return x;
}

geomodel::VelocityMap network_forward(const NetworkState& net, const wavesim::SurveyData& d) {
  TensorF y = network_forward_cached(net, gather_to_input(net, d), nullptr);
  geomodel::VelocityMap m;
  m.grid = geomodel::GridSpec{net.arch.out_rows, net.arch.out_cols, net.arch.dz, net.arch.dx};
  m.vp = Array2Dd(net.arch.out_rows, net.arch.out_cols);
  double span = net.norm.m_max - net.norm.m_min;
  for (size_t k = 0; k < y.size(); ++k) m.vp.data()[k] = net.norm.m_min + span * static_cast<double>(y.data[k]);
  return m;
}

namespace {

void write_tensor(const std::string& path, const TensorF& t) {
  std::vector<uint32_t> dims(t.dims.begin(), t.dims.end());
  write_container(path, dims, t.data.data(), t.size());
}

TensorF read_tensor(const std::string& path) {
  ContainerData c = read_container(path);
  TensorF t(std::vector<int>(c.dims.begin(), c.dims.end()));
  t.data = std::move(c.data);
  return t;
}

}  // namespace

void save_checkpoint(const NetworkState& net, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream mf(dir + "/checkpoint.txt");
  if (!mf) throw std::runtime_error("save_checkpoint: cannot write " + dir);
  const ArchitectureSpec& a = net.arch;
  mf << "arch " << a.n_sources << ' ' << a.t_samples << ' ' << a.n_receivers << ' ' << a.out_rows << ' '
     << a.out_cols << ' ' << a.dz << ' ' << a.dx << '\n';
  mf << "encoder_widths";
  for (int w : a.encoder_widths) mf << ' ' << w;
  mf << "\ndecoder_widths";
  for (int w : a.decoder_widths) mf << ' ' << w;
  mf << '\n';
  mf.precision(17);
  mf << "norm " << net.norm.d_min << ' ' << net.norm.d_max << ' ' << net.norm.m_min << ' ' << net.norm.m_max << '\n';
  mf << "step_count " << net.step_count << '\n';
  mf << "layers " << net.layers.size() << '\n';
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& s = net.layers[i];
    mf << "layer " << i << ' ' << static_cast<int>(s.kind) << ' ' << s.kh << ' ' << s.kw << ' ' << s.sh << ' '
       << s.sw << ' ' << s.ph << ' ' << s.pw << ' ' << s.channels_in << ' ' << s.channels_out << ' ' << s.leak;
    mf << ' ' << s.target_dims.size();
    for (int t : s.target_dims) mf << ' ' << t;
    mf << '\n';
    if (!s.has_params()) continue;
    write_tensor(dir + "/layer" + std::to_string(i) + "_w.fwi1", net.weights[i]);
    write_tensor(dir + "/layer" + std::to_string(i) + "_b.fwi1", net.biases[i]);
    write_tensor(dir + "/layer" + std::to_string(i) + "_mw.fwi1", net.adam_mw[i]);
    write_tensor(dir + "/layer" + std::to_string(i) + "_vw.fwi1", net.adam_vw[i]);
    write_tensor(dir + "/layer" + std::to_string(i) + "_mb.fwi1", net.adam_mb[i]);
    write_tensor(dir + "/layer" + std::to_string(i) + "_vb.fwi1", net.adam_vb[i]);
  }
}

NetworkState load_checkpoint(const std::string& dir) {
  std::ifstream mf(dir + "/checkpoint.txt");
  if (!mf) throw std::runtime_error("load_checkpoint: cannot read " + dir + "/checkpoint.txt");
  NetworkState net;
  std::string key;
  mf >> key;
  if (key != "arch") throw std::runtime_error("load_checkpoint: bad manifest");
  ArchitectureSpec& a = net.arch;
  mf >> a.n_sources >> a.t_samples >> a.n_receivers >> a.out_rows >> a.out_cols >> a.dz >> a.dx;
  mf >> key;
  for (int& w : a.encoder_widths) mf >> w;
  mf >> key;
  for (int& w : a.decoder_widths) mf >> w;
  mf >> key >> net.norm.d_min >> net.norm.d_max >> net.norm.m_min >> net.norm.m_max;
  mf >> key >> net.step_count;
  size_t n;
  mf >> key >> n;
  net.layers.resize(n);
  net.weights.resize(n);
  net.biases.resize(n);
  net.adam_mw.resize(n);
  net.adam_vw.resize(n);
  net.adam_mb.resize(n);
  net.adam_vb.resize(n);
  for (size_t i = 0; i < n; ++i) {
    size_t idx;
    int kind, ntd;
    LayerSpec& s = net.layers[i];
    mf >> key >> idx >> kind >> s.kh >> s.kw >> s.sh >> s.sw >> s.ph >> s.pw >> s.channels_in >> s.channels_out >>
        s.leak >> ntd;
    if (key != "layer" || idx != i) throw std::runtime_error("load_checkpoint: bad layer record");
    s.kind = static_cast<LayerKind>(kind);
    s.target_dims.resize(static_cast<size_t>(ntd));
    for (int& t : s.target_dims) mf >> t;
    if (!s.has_params()) continue;
    net.weights[i] = read_tensor(dir + "/layer" + std::to_string(i) + "_w.fwi1");
    net.biases[i] = read_tensor(dir + "/layer" + std::to_string(i) + "_b.fwi1");
    net.adam_mw[i] = read_tensor(dir + "/layer" + std::to_string(i) + "_mw.fwi1");
    net.adam_vw[i] = read_tensor(dir + "/layer" + std::to_string(i) + "_vw.fwi1");
    net.adam_mb[i] = read_tensor(dir + "/layer" + std::to_string(i) + "_mb.fwi1");
    net.adam_vb[i] = read_tensor(dir + "/layer" + std::to_string(i) + "_vb.fwi1");
  }
  return net;
}

}  // namespace fwi::neural
