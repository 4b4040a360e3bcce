#include "fwi/cli/dispatch.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fwi/core/container.hpp"
#include "fwi/core/rng.hpp"
#include "fwi/eval/harness.hpp"
#include "fwi/wavesim/simulate.hpp"

namespace fwi::cli {

namespace {

namespace fs = std::filesystem;

void write_run_manifest(const CommandArgs& a, const std::vector<std::string>& artifacts, double wall_seconds) {
  fs::create_directories(a.out);
  std::ofstream mf(a.out + "/run_manifest.txt");
  if (!mf) throw std::runtime_error("cannot write run manifest in " + a.out);
  mf << "command " << a.command << '\n';
  mf << "config_digest " << a.config.digest << '\n';
  mf << "seed " << a.config.seed << '\n';
  mf << "wall_seconds " << wall_seconds << '\n';
  for (const auto& p : artifacts) mf << "artifact " << p << '\n';
}

void assign_partition_tags(geomodel::Dataset& ds) {
  geomodel::SizePartitions parts = geomodel::partition_by_size(ds);
  auto tag = [&](const geomodel::Dataset& part, const char* name) {
    for (const auto& e : part.entries)
      for (auto& d : ds.entries)
        if (d.scenario_id == e.scenario_id) d.partition_tag = name;
  };
  tag(parts.tiny, "tiny");
  tag(parts.small, "small");
  tag(parts.medium, "medium");
  tag(parts.large, "large");
}

std::vector<std::string> cmd_generate_data(const CommandArgs& a) {
  geomodel::DatasetGenConfig gc = a.config.data;
  geomodel::Dataset ds = geomodel::generate_dataset(a.config.grid, gc, a.config.bounds);
  assign_partition_tags(ds);
  geomodel::save_dataset(ds, a.out);
  return {a.out + "/manifest.txt"};
}

std::vector<std::string> cmd_simulate(const CommandArgs& a) {
  physfwi::SimBundle bundle = a.config.make_bundle();
  std::vector<std::string> artifacts;
  if (!a.model.empty()) {
    geomodel::VelocityMap m{a.config.grid, read_array2d(a.model)};
    wavesim::SurveyData survey = wavesim::simulate_shots(m, bundle.geometry, bundle.wavelet, bundle.sim);
    fs::create_directories(a.out);
    wavesim::save_survey(a.out + "/survey.fwi1", survey, bundle.geometry, bundle.wavelet);
    artifacts.push_back(a.out + "/survey.fwi1");
  } else if (!a.dataset.empty()) {
    geomodel::Dataset ds = geomodel::load_dataset(a.dataset);
    for (auto& e : ds.entries) {
      if (e.gather) continue;
      e.gather = wavesim::simulate_shots(e.label(), bundle.geometry, bundle.wavelet, bundle.sim);
    }
    geomodel::save_dataset(ds, a.out);
    artifacts.push_back(a.out + "/manifest.txt");
  } else {
    throw ConfigError("simulate: need --model or --dataset");
  }
  return artifacts;
}

std::vector<std::string> cmd_train(const CommandArgs& a) {
  if (a.dataset.empty()) throw ConfigError("train: need --dataset");
  geomodel::Dataset ds = geomodel::load_dataset(a.dataset);
  neural::NetworkState net = neural::build_network(a.config.make_arch(), derive_seed(a.config.seed, 0x90D0u));
  neural::TrainConfig tc = a.config.train;
  tc.seed = derive_seed(a.config.seed, 0x7124Eu);
  std::vector<double> history = neural::train(net, ds, tc);
  fs::create_directories(a.out);
  neural::save_checkpoint(net, a.out);
  std::ofstream csv(a.out + "/loss.csv");
  csv << "epoch,loss\n";
  csv.precision(12);
  for (size_t e = 0; e < history.size(); ++e) csv << e << ',' << history[e] << '\n';
  return {a.out + "/checkpoint.txt", a.out + "/loss.csv"};
}

std::vector<std::string> cmd_augment(const CommandArgs& a) {
  if (a.labeled.empty() || a.unlabeled.empty()) throw ConfigError("augment: need --labeled and --unlabeled");
  geomodel::Dataset labeled = geomodel::load_dataset(a.labeled);
  geomodel::Dataset unlabeled = geomodel::load_dataset(a.unlabeled, /*load_labels=*/false);
  augment::AugmentConfig ac = a.config.make_augment_config();
  ac.surrogate_train.seed = derive_seed(a.config.seed, 0x5A6u);
  augment::AugmentResult res = augment::augment_iterative(labeled, unlabeled, ac, a.config.make_bundle());
  geomodel::save_dataset(res.dataset, a.out);
  std::ofstream csv(a.out + "/rounds.csv");
  csv << "round,validation_mae,skipped\n";
  csv.precision(12);
  for (size_t r = 0; r < res.round_validation_mae.size(); ++r)
    csv << r + 1 << ',' << res.round_validation_mae[r] << ','
        << (r + 1 == res.round_validation_mae.size() ? res.skipped_scenarios.size() : 0) << '\n';
  return {a.out + "/manifest.txt", a.out + "/rounds.csv"};
}

std::vector<std::string> cmd_invert_physics(const CommandArgs& a) {
  if (a.data.empty() || a.init.empty()) throw ConfigError("invert-physics: need --data and --init");
  physfwi::SimBundle bundle = a.config.make_bundle();
  wavesim::SurveyData observed = wavesim::load_survey(a.data);
  geomodel::VelocityMap m0{a.config.grid, read_array2d(a.init)};
  physfwi::InvertOptions opt = a.config.invert;
  opt.bounds = a.config.bounds;
  // the recorded dt is only CFL-stable up to vmax_hint, so iterates must not
  // be allowed to exceed it
  opt.bounds.v_max = std::min(opt.bounds.v_max, a.config.vmax_hint);
  physfwi::FwiRunState st = physfwi::invert(observed, m0, a.config.fwi, bundle, opt);
  fs::create_directories(a.out);
  write_array2d(a.out + "/final_model.fwi1", st.model.vp);
  std::ofstream csv(a.out + "/objective.csv");
  csv << "iteration,objective\n";
  csv.precision(12);
  for (size_t i = 0; i < st.objective_history.size(); ++i) csv << i << ',' << st.objective_history[i] << '\n';
  std::ofstream txt(a.out + "/result.txt");
  txt << "stop_reason " << st.stop_reason << "\niterations " << st.iteration << "\nstep_size " << st.step_size
      << '\n';
  return {a.out + "/final_model.fwi1", a.out + "/objective.csv"};
}

std::vector<std::string> cmd_evaluate(const CommandArgs& a) {
  if (a.data_root.empty() || a.setup.empty()) throw ConfigError("evaluate: need --data-root and --setup");
  if (a.seeds < 1) throw ConfigError("evaluate: --seeds must be >= 1");
  geomodel::Dataset all = geomodel::load_dataset(a.data_root + "/manifest.txt");
  eval::PartitionedData parts;
  for (const auto& e : all.entries) {
    if (e.partition_tag == "tiny") parts.tiny.entries.push_back(e);
    else if (e.partition_tag == "small") parts.small.entries.push_back(e);
    else if (e.partition_tag == "medium") parts.medium.entries.push_back(e);
    else if (e.partition_tag == "large") parts.large.entries.push_back(e);
  }
  eval::SetupConfig sc;
  sc.arch = a.config.make_arch();
  sc.train = a.config.train;
  sc.aug = a.config.make_augment_config();
  sc.bundle = a.config.make_bundle();
  sc.bounds = a.config.bounds;
  sc.config_digest = a.config.digest;

  std::vector<double> finals;
  std::vector<std::string> artifacts;
  for (int k = 0; k < a.seeds; ++k) {
    sc.seed = derive_seed(a.config.seed, 0xEA17000u + static_cast<uint64_t>(k));
    eval::EvalReport rep = eval::run_setup(a.setup, parts, sc);
    std::string dir = a.out + "/seed" + std::to_string(k);
    eval::emit_report(rep, dir);
    artifacts.push_back(dir + "/curve.csv");
    finals.push_back(rep.final_epsilon);
  }
  std::sort(finals.begin(), finals.end());
  double median = finals.size() % 2 ? finals[finals.size() / 2]
                                    : 0.5 * (finals[finals.size() / 2 - 1] + finals[finals.size() / 2]);
  std::ofstream sum(a.out + "/median.txt");
  sum.precision(12);
  sum << "setup " << a.setup << "\nseeds " << a.seeds << "\nmedian_final_epsilon " << median << '\n';
  artifacts.push_back(a.out + "/median.txt");
  return artifacts;
}

}  // namespace

int dispatch(const CommandArgs& args) {
  auto t0 = std::chrono::steady_clock::now();
  try {
#ifdef _OPENMP
    if (args.config.threads > 0) omp_set_num_threads(args.config.threads);
#endif
    if (args.out.empty()) throw ConfigError(args.command + ": need --out");
    std::vector<std::string> artifacts;
    if (args.command == "generate-data") artifacts = cmd_generate_data(args);
    else if (args.command == "simulate") artifacts = cmd_simulate(args);
    else if (args.command == "train") artifacts = cmd_train(args);
    else if (args.command == "augment") artifacts = cmd_augment(args);
    else if (args.command == "invert-physics") artifacts = cmd_invert_physics(args);
    else if (args.command == "evaluate") artifacts = cmd_evaluate(args);
    else throw ConfigError("unknown command '" + args.command + "'");
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_run_manifest(args, artifacts, wall);
    return kOk;
  } catch (const ConfigError& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return kConfigError;
  } catch (const wavesim::InstabilityError& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return kInstability;
  } catch (const std::invalid_argument& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return kDataError;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return kIoError;
  }
}

}  // namespace fwi::cli
