#include "fwi/geomodel/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fwi/core/container.hpp"
#include "fwi/wavesim/simulate.hpp"

namespace fs = std::filesystem;

namespace fwi::geomodel {

void save_dataset(const Dataset& ds, const std::string& dir, const std::string& manifest_name) {
  fs::create_directories(dir);
  std::ofstream mf(fs::path(dir) / manifest_name);
  if (!mf) throw std::runtime_error("save_dataset: cannot write manifest in " + dir);
  mf.precision(17);
  // header comment carries grid spacing; record lines hold the per-entry fields
  for (const auto& e : ds.entries) {
    if (e.label_value) {
      mf << "#grid " << e.label_value->grid.dz << ' ' << e.label_value->grid.dx << '\n';
      break;
    }
  }
  for (const auto& e : ds.entries) {
    std::string label_path = "-";
    std::string gather_path = "-";
    std::string base = "s" + std::to_string(e.scenario_id);
    if (!e.provenance.empty() && e.provenance != "original") {
      std::string suffix = e.provenance;
      for (char& c : suffix)
        if (c == '@') c = '_';
      base += "_" + suffix;
    }
    if (e.label_value) {
      label_path = base + "_label.fwi1";
      write_array2d((fs::path(dir) / label_path).string(), e.label_value->vp);
    }
    if (e.gather) {
      gather_path = base + "_gather.fwi1";
      std::vector<uint32_t> dims = {static_cast<uint32_t>(e.gather->n_samples()), static_cast<uint32_t>(e.gather->n_shots()),
                                    static_cast<uint32_t>(e.gather->n_receivers())};
      std::vector<float> buf;
      buf.reserve(size_t(dims[0]) * dims[1] * dims[2]);
      for (int t = 0; t < e.gather->n_samples(); ++t)
        for (const auto& g : e.gather->gathers)
          for (int r = 0; r < e.gather->n_receivers(); ++r) buf.push_back(static_cast<float>(g.data(t, r)));
      write_container((fs::path(dir) / gather_path).string(), dims, buf.data(), buf.size());
      std::ofstream meta((fs::path(dir) / (gather_path + ".meta")).string());
      meta.precision(17);
      meta << "dt_recorded = " << e.gather->gathers[0].dt_recorded << "\n";
    }
    mf << e.scenario_id << ' ' << e.partition_tag << ' ' << label_path << ' ' << gather_path << ' ' << e.plume_mass_proxy
       << ' ' << e.provenance << '\n';
  }
}

Dataset load_dataset(const std::string& manifest_path, bool load_labels, bool load_gathers) {
  std::ifstream mf(manifest_path);
  if (!mf) throw std::runtime_error("load_dataset: cannot open " + manifest_path);
  fs::path dir = fs::path(manifest_path).parent_path();
  Dataset ds;
  std::string line;
  double grid_dz = 10.0, grid_dx = 10.0;
  while (std::getline(mf, line)) {
    if (line.rfind("#grid ", 0) == 0) {
      std::istringstream gs(line.substr(6));
      gs >> grid_dz >> grid_dx;
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    DatasetEntry e;
    std::string label_path, gather_path;
    if (!(ss >> e.scenario_id >> e.partition_tag >> label_path >> gather_path >> e.plume_mass_proxy))
      throw std::runtime_error("load_dataset: malformed manifest line: " + line);
    if (!(ss >> e.provenance)) e.provenance = "original";
    if (load_labels && label_path != "-") {
      VelocityMap m;
      m.vp = read_array2d((dir / label_path).string());
      m.grid.nz = m.vp.rows();
      m.grid.nx = m.vp.cols();
      m.grid.dz = grid_dz;
      m.grid.dx = grid_dx;
      e.label_value = std::move(m);
    }
    if (load_gathers && gather_path != "-") e.gather = wavesim::load_survey((dir / gather_path).string());
    ds.entries.push_back(std::move(e));
  }
  return ds;
}

}  // namespace fwi::geomodel
