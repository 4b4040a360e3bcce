#include "fwi/wavesim/simulate.hpp"

#include <fstream>

#include "fwi/core/container.hpp"
#include "fwi/geomodel/generate.hpp"
#include "fwi/wavesim/engine.hpp"

namespace fwi::wavesim {

ShotGather simulate_shot(const geomodel::ElasticModel& model, const geomodel::AcquisitionGeometry& geometry,
                         int source_index, const SourceWavelet& wavelet, const SimConfig& cfg) {
  ShotEngine engine(model, geometry, source_index, wavelet, cfg);
  return engine.run_forward(false);
}

SurveyData simulate_shots(const geomodel::VelocityMap& m, const geomodel::AcquisitionGeometry& geometry,
                          const SourceWavelet& wavelet, const SimConfig& cfg) {
  geomodel::ElasticModel model = geomodel::elastic_from_vp(m);
  SurveyData out;
  out.gathers.resize(geometry.n_sources());
  // shots are independent; parallel execution writes into preassigned slots,
  // so the result does not depend on the worker count
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < geometry.n_sources(); ++s) out.gathers[s] = simulate_shot(model, geometry, s, wavelet, cfg);
  return out;
}

void save_survey(const std::string& path, const SurveyData& survey, const geomodel::AcquisitionGeometry& geometry,
                 const SourceWavelet& wavelet) {
  survey.validate();
  const int t_n = survey.n_samples(), s_n = survey.n_shots(), r_n = survey.n_receivers();
  std::vector<float> buf;
  buf.reserve(static_cast<size_t>(t_n) * s_n * r_n);
  for (int t = 0; t < t_n; ++t)
    for (int s = 0; s < s_n; ++s)
      for (int r = 0; r < r_n; ++r) buf.push_back(static_cast<float>(survey.gathers[s].data(t, r)));
  write_container(path, {static_cast<uint32_t>(t_n), static_cast<uint32_t>(s_n), static_cast<uint32_t>(r_n)}, buf.data(),
                  buf.size());

  std::ofstream meta(path + ".meta");
  meta.precision(17);
  meta << "dt_recorded = " << (survey.gathers.empty() ? geometry.dt_recorded() : survey.gathers[0].dt_recorded) << "\n";
  meta << "nt = " << geometry.nt << "\n";
  meta << "dt = " << geometry.dt << "\n";
  meta << "record_decimation = " << geometry.record_decimation << "\n";
  meta << "wavelet.peak_frequency = " << wavelet.peak_frequency << "\n";
  meta << "wavelet.delay = " << wavelet.delay << "\n";
  meta << "wavelet.amplitude = " << wavelet.amplitude << "\n";
  meta << "sources =";
  for (const auto& s : geometry.sources) meta << ' ' << s.first << ',' << s.second;
  meta << "\nreceivers =";
  for (const auto& r : geometry.receivers) meta << ' ' << r.first << ',' << r.second;
  meta << "\n";
}

SurveyData load_survey(const std::string& path) {
  ContainerData c = read_container(path);
  if (c.dims.size() != 3) throw std::runtime_error("load_survey: expected rank-3 (T,S,R) container in " + path);
  int t_n = static_cast<int>(c.dims[0]), s_n = static_cast<int>(c.dims[1]), r_n = static_cast<int>(c.dims[2]);
  double dt_rec = 0;
  {
    std::ifstream meta(path + ".meta");
    std::string key, eq;
    while (meta >> key >> eq) {
      if (key == "dt_recorded") {
        meta >> dt_rec;
        break;
      }
      std::string rest;
      std::getline(meta, rest);
    }
  }
  SurveyData out;
  out.gathers.assign(s_n, ShotGather{Array2Dd(t_n, r_n), dt_rec});
  size_t k = 0;
  for (int t = 0; t < t_n; ++t)
    for (int s = 0; s < s_n; ++s)
      for (int r = 0; r < r_n; ++r) out.gathers[s].data(t, r) = c.data[k++];
  return out;
}

}  // namespace fwi::wavesim
