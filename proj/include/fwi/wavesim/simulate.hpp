#pragma once

#include <string>

#include "fwi/geomodel/types.hpp"
#include "fwi/wavesim/types.hpp"

namespace fwi::wavesim {

// Forward mapping f(m) for a single source: vertical body-force injection of
// the wavelet, vertical particle velocity recorded at the receivers.
ShotGather simulate_shot(const geomodel::ElasticModel& model, const geomodel::AcquisitionGeometry& geometry,
                         int source_index, const SourceWavelet& wavelet, const SimConfig& cfg);

// f(m) of the whole survey: elastic_from_vp then one shot per source.
SurveyData simulate_shots(const geomodel::VelocityMap& m, const geomodel::AcquisitionGeometry& geometry,
                          const SourceWavelet& wavelet, const SimConfig& cfg);

// FWI1 container with dims (T, S, R), plus a plain-text metadata sidecar
// (<path>.meta) recording dt_recorded, geometry and wavelet parameters.
void save_survey(const std::string& path, const SurveyData& survey, const geomodel::AcquisitionGeometry& geometry,
                 const SourceWavelet& wavelet);
SurveyData load_survey(const std::string& path);

}  // namespace fwi::wavesim
