#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fwi/geomodel/types.hpp"
#include "fwi/wavesim/types.hpp"

namespace fwi::geomodel {

// One (scenario, label, seismogram) record. Labels can be absent (unlabeled
// data) or guarded (present on disk but off-limits for a given experiment;
// any access trips the guard so a run that cheats fails loudly).
struct DatasetEntry {
  int scenario_id = 0;
  std::string partition_tag = "all";  // all | tiny | small | medium | large
  std::string provenance = "original";
  double plume_mass_proxy = 0;
  std::optional<VelocityMap> label_value;
  std::optional<wavesim::SurveyData> gather;
  bool label_guarded = false;

  bool has_label() const { return label_value.has_value(); }
  const VelocityMap& label() const {
    if (label_guarded) throw std::logic_error("label access guard tripped for scenario " + std::to_string(scenario_id));
    if (!label_value) throw std::logic_error("entry has no label (scenario " + std::to_string(scenario_id) + ")");
    return *label_value;
  }
};

struct Dataset {
  std::vector<DatasetEntry> entries;
  std::string partition = "all";

  size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

// Plain-text manifest, one record per line:
//   scenario_id  partition_tag  label_path|-  gather_path|-  plume_mass_proxy  [provenance]
// Array payloads live in FWI1 containers next to the manifest.
void save_dataset(const Dataset& ds, const std::string& dir, const std::string& manifest_name = "manifest.txt");
Dataset load_dataset(const std::string& manifest_path, bool load_labels = true, bool load_gathers = true);

}  // namespace fwi::geomodel
