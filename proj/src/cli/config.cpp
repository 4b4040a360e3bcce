#include "fwi/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fwi/core/rng.hpp"

namespace fwi::cli {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

long long to_int(const std::string& v, const std::string& key) {
  size_t pos = 0;
  long long r;
  try {
    r = std::stoll(v, &pos);
  } catch (...) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
  return r;
}

double to_double(const std::string& v, const std::string& key) {
  size_t pos = 0;
  double r;
  try {
    r = std::stod(v, &pos);
  } catch (...) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  return r;
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: key '" + key + "' expects true/false, got '" + v + "'");
}

template <class T>
std::vector<T> to_list(const std::string& v, const std::string& key) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if constexpr (std::is_integral_v<T>)
      out.push_back(static_cast<T>(to_int(item, key)));
    else
      out.push_back(static_cast<T>(to_double(item, key)));
  }
  if (out.empty()) throw ConfigError("config: key '" + key + "' expects a comma-separated list");
  return out;
}

uint64_t fnv1a(const std::string& s, uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

using Setter = std::function<void(RunConfig&, const std::string& value, const std::string& key)>;

const std::map<std::string, Setter>& key_table() {
  static const std::map<std::string, Setter> table = {
      {"global.seed", [](RunConfig& c, const std::string& v, const std::string& k) { c.seed = static_cast<uint64_t>(to_int(v, k)); }},
      {"global.out_dir", [](RunConfig& c, const std::string& v, const std::string&) { c.out_dir = v; }},
      {"global.threads", [](RunConfig& c, const std::string& v, const std::string& k) { c.threads = static_cast<int>(to_int(v, k)); }},
      {"grid.nz", [](RunConfig& c, const std::string& v, const std::string& k) { c.grid.nz = static_cast<int>(to_int(v, k)); }},
      {"grid.nx", [](RunConfig& c, const std::string& v, const std::string& k) { c.grid.nx = static_cast<int>(to_int(v, k)); }},
      {"grid.dz", [](RunConfig& c, const std::string& v, const std::string& k) { c.grid.dz = to_double(v, k); }},
      {"grid.dx", [](RunConfig& c, const std::string& v, const std::string& k) { c.grid.dx = to_double(v, k); }},
      {"data.n_scenarios", [](RunConfig& c, const std::string& v, const std::string& k) { c.data.n_scenarios = static_cast<int>(to_int(v, k)); }},
      {"data.min_mass_proxy", [](RunConfig& c, const std::string& v, const std::string& k) { c.data.min_mass_proxy = to_double(v, k); }},
      {"data.max_mass_proxy", [](RunConfig& c, const std::string& v, const std::string& k) { c.data.max_mass_proxy = to_double(v, k); }},
      {"data.drop_min", [](RunConfig& c, const std::string& v, const std::string& k) { c.data.drop_min = to_double(v, k); }},
      {"data.drop_max", [](RunConfig& c, const std::string& v, const std::string& k) { c.data.drop_max = to_double(v, k); }},
      {"data.layer_velocities", [](RunConfig& c, const std::string& v, const std::string& k) { c.data.layer_velocities = to_list<double>(v, k); }},
      {"acq.n_sources", [](RunConfig& c, const std::string& v, const std::string& k) { c.n_sources = static_cast<int>(to_int(v, k)); }},
      {"acq.n_receivers", [](RunConfig& c, const std::string& v, const std::string& k) { c.n_receivers = static_cast<int>(to_int(v, k)); }},
      {"acq.source_depth", [](RunConfig& c, const std::string& v, const std::string& k) { c.source_depth = to_double(v, k); }},
      {"acq.receiver_depth", [](RunConfig& c, const std::string& v, const std::string& k) { c.receiver_depth = to_double(v, k); }},
      {"acq.record_time", [](RunConfig& c, const std::string& v, const std::string& k) { c.record_time = to_double(v, k); }},
      {"acq.dt", [](RunConfig& c, const std::string& v, const std::string& k) { c.dt = to_double(v, k); }},
      {"acq.record_decimation", [](RunConfig& c, const std::string& v, const std::string& k) { c.record_decimation = static_cast<int>(to_int(v, k)); }},
      {"acq.vmax_hint", [](RunConfig& c, const std::string& v, const std::string& k) { c.vmax_hint = to_double(v, k); }},
      {"wavelet.peak_frequency", [](RunConfig& c, const std::string& v, const std::string& k) { c.wavelet.peak_frequency = to_double(v, k); }},
      {"wavelet.delay", [](RunConfig& c, const std::string& v, const std::string& k) { c.wavelet.delay = to_double(v, k); }},
      {"wavelet.amplitude", [](RunConfig& c, const std::string& v, const std::string& k) { c.wavelet.amplitude = to_double(v, k); }},
      {"sim.spatial_order", [](RunConfig& c, const std::string& v, const std::string& k) { c.sim.spatial_order = static_cast<int>(to_int(v, k)); }},
      {"sim.pml_cells", [](RunConfig& c, const std::string& v, const std::string& k) { c.sim.pml_cells = static_cast<int>(to_int(v, k)); }},
      {"sim.pml_reflection_target", [](RunConfig& c, const std::string& v, const std::string& k) { c.sim.pml_reflection_target = to_double(v, k); }},
      {"sim.free_surface_top", [](RunConfig& c, const std::string& v, const std::string& k) { c.sim.free_surface_top = to_bool(v, k); }},
      {"sim.cfl_safety", [](RunConfig& c, const std::string& v, const std::string& k) { c.sim.cfl_safety = to_double(v, k); }},
      {"sim.adjoint_memory_budget", [](RunConfig& c, const std::string& v, const std::string& k) { c.sim.adjoint_memory_budget = static_cast<size_t>(to_int(v, k)); }},
      {"train.epochs", [](RunConfig& c, const std::string& v, const std::string& k) { c.train.epochs = static_cast<int>(to_int(v, k)); }},
      {"train.batch_size", [](RunConfig& c, const std::string& v, const std::string& k) { c.train.batch_size = static_cast<int>(to_int(v, k)); }},
      {"train.lr", [](RunConfig& c, const std::string& v, const std::string& k) { c.train.lr = to_double(v, k); }},
      {"train.lr_decay", [](RunConfig& c, const std::string& v, const std::string& k) { c.train.lr_decay = to_double(v, k); }},
      {"train.adam_beta1", [](RunConfig& c, const std::string& v, const std::string& k) { c.train.adam_beta1 = to_double(v, k); }},
      {"train.adam_beta2", [](RunConfig& c, const std::string& v, const std::string& k) { c.train.adam_beta2 = to_double(v, k); }},
      {"train.adam_eps", [](RunConfig& c, const std::string& v, const std::string& k) { c.train.adam_eps = to_double(v, k); }},
      {"net.encoder_widths", [](RunConfig& c, const std::string& v, const std::string& k) { c.encoder_widths = to_list<int>(v, k); }},
      {"net.decoder_widths", [](RunConfig& c, const std::string& v, const std::string& k) { c.decoder_widths = to_list<int>(v, k); }},
      {"fwi.reg_weight", [](RunConfig& c, const std::string& v, const std::string& k) { c.fwi.reg_weight = to_double(v, k); }},
      {"fwi.reg_kind",
       [](RunConfig& c, const std::string& v, const std::string& k) {
         if (v == "l2_gradient") c.fwi.reg_kind = physfwi::RegKind::l2_gradient;
         else if (v == "l1_gradient_smoothed") c.fwi.reg_kind = physfwi::RegKind::l1_gradient_smoothed;
         else throw ConfigError("config: key '" + k + "' expects l2_gradient or l1_gradient_smoothed");
       }},
      {"fwi.smoothing_eps", [](RunConfig& c, const std::string& v, const std::string& k) { c.fwi.smoothing_eps = to_double(v, k); }},
      {"invert.max_iterations", [](RunConfig& c, const std::string& v, const std::string& k) { c.invert.max_iterations = static_cast<int>(to_int(v, k)); }},
      {"invert.initial_step", [](RunConfig& c, const std::string& v, const std::string& k) { c.invert.initial_step = to_double(v, k); }},
      {"invert.armijo_c", [](RunConfig& c, const std::string& v, const std::string& k) { c.invert.armijo_c = to_double(v, k); }},
      {"invert.backtrack_factor", [](RunConfig& c, const std::string& v, const std::string& k) { c.invert.backtrack_factor = to_double(v, k); }},
      {"invert.max_backtracks", [](RunConfig& c, const std::string& v, const std::string& k) { c.invert.max_backtracks = static_cast<int>(to_int(v, k)); }},
      {"invert.rel_decrease_tol", [](RunConfig& c, const std::string& v, const std::string& k) { c.invert.rel_decrease_tol = to_double(v, k); }},
      {"augment.rounds", [](RunConfig& c, const std::string& v, const std::string& k) { c.augment_rounds = static_cast<int>(to_int(v, k)); }},
      {"augment.keep_original_labels", [](RunConfig& c, const std::string& v, const std::string& k) { c.keep_original_labels = to_bool(v, k); }},
      {"augment.validation_fraction", [](RunConfig& c, const std::string& v, const std::string& k) { c.validation_fraction = to_double(v, k); }},
      {"augment.surrogate_epochs", [](RunConfig& c, const std::string& v, const std::string& k) { c.surrogate_epochs = static_cast<int>(to_int(v, k)); }},
      {"bounds.v_min", [](RunConfig& c, const std::string& v, const std::string& k) { c.bounds.v_min = to_double(v, k); }},
      {"bounds.v_max", [](RunConfig& c, const std::string& v, const std::string& k) { c.bounds.v_max = to_double(v, k); }},
  };
  return table;
}

void validate(RunConfig& c) {
  c.grid.validate();
  c.sim.validate();
  c.wavelet.validate();
  c.train.validate();
  c.invert.validate();
  c.fwi.validate();
  if (c.n_sources < 1 || c.n_receivers < 1) throw ConfigError("config: acq.n_sources/n_receivers must be >= 1");
  if (c.record_time <= 0) throw ConfigError("config: acq.record_time must be positive");
  if (c.dt < 0) throw ConfigError("config: acq.dt must be >= 0");
  if (c.record_decimation < 1) throw ConfigError("config: acq.record_decimation must be >= 1");
  if (c.vmax_hint <= 0) throw ConfigError("config: acq.vmax_hint must be positive");
  if (c.augment_rounds < 1) throw ConfigError("config: augment.rounds must be >= 1");
  if (c.validation_fraction < 0 || c.validation_fraction >= 1)
    throw ConfigError("config: augment.validation_fraction must be in [0,1)");
  if (c.surrogate_epochs < 0) throw ConfigError("config: augment.surrogate_epochs must be >= 0");
  if (c.bounds.v_min <= 0 || c.bounds.v_max <= c.bounds.v_min) throw ConfigError("config: bad velocity bounds");
  if (c.encoder_widths.size() != 5 || c.decoder_widths.size() != 5)
    throw ConfigError("config: net.encoder_widths/decoder_widths expect 5 entries");
}

}  // namespace

RunConfig default_config() {
  RunConfig c;
  c.data.n_scenarios = 200;
  c.data.min_mass_proxy = 150;
  c.data.max_mass_proxy = 2000;
  return c;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig c = default_config();
  std::vector<std::string> canonical;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: " + origin + ":" + std::to_string(lineno) + ": expected 'section.key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto it = key_table().find(key);
    if (it == key_table().end())
      throw ConfigError("config: " + origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    try {
      it->second(c, value, key);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ConfigError("config: " + origin + ":" + std::to_string(lineno) + ": " + ex.what());
    }
    canonical.push_back(key + "=" + value);
  }
  c.data.seed = derive_seed(c.seed, 0xDA7A5E7u);
  validate(c);
  // digest is order-independent: sorted canonical pairs
  std::sort(canonical.begin(), canonical.end());
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& kv : canonical) h = fnv1a(kv + "\n", h);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  c.digest = buf;
  return c;
}

RunConfig parse_config(const std::string& path) {
  if (path.empty()) return parse_config_text("", "<defaults>");
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path);
}

geomodel::AcquisitionGeometry RunConfig::make_geometry() const {
  geomodel::AcquisitionGeometry g;
  double width = grid.width();
  for (int s = 0; s < n_sources; ++s)
    g.sources.push_back({(s + 0.5) * width / n_sources, source_depth});
  for (int r = 0; r < n_receivers; ++r)
    g.receivers.push_back({(r + 0.5) * width / n_receivers, receiver_depth});
  double step = dt;
  if (step <= 0) {
    double stencil_sum = sim.spatial_order == 2 ? 1.0 : 7.0 / 6.0;
    step = sim.cfl_safety * std::min(grid.dz, grid.dx) / (vmax_hint * std::sqrt(2.0) * stencil_sum);
  }
  g.dt = step;
  g.nt = static_cast<int>(std::ceil(record_time / step));
  g.record_decimation = record_decimation;
  return g;
}

physfwi::SimBundle RunConfig::make_bundle() const { return {make_geometry(), wavelet, sim}; }

neural::ArchitectureSpec RunConfig::make_arch() const {
  geomodel::AcquisitionGeometry g = make_geometry();
  neural::ArchitectureSpec a;
  a.n_sources = n_sources;
  a.t_samples = g.n_samples();
  a.n_receivers = n_receivers;
  a.out_rows = grid.nz;
  a.out_cols = grid.nx;
  a.dz = grid.dz;
  a.dx = grid.dx;
  a.encoder_widths = encoder_widths;
  a.decoder_widths = decoder_widths;
  return a;
}

augment::AugmentConfig RunConfig::make_augment_config() const {
  augment::AugmentConfig a;
  a.rounds = augment_rounds;
  a.surrogate_train = train;
  if (surrogate_epochs > 0) a.surrogate_train.epochs = surrogate_epochs;
  a.arch = make_arch();
  a.keep_original_labels = keep_original_labels;
  a.validation_fraction = validation_fraction;
  a.bounds = bounds;
  return a;
}

}  // namespace fwi::cli
