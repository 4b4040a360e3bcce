#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "fwi/eval/harness.hpp"

namespace fwi::eval {

namespace {

struct File {
  std::FILE* f;
  explicit File(const std::string& path) : f(std::fopen(path.c_str(), "w")) {
    if (!f) throw std::runtime_error("emit_report: cannot write " + path);
  }
  ~File() { std::fclose(f); }
};

}  // namespace

void emit_report(const EvalReport& rep, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    File csv(out_dir + "/curve.csv");
    std::fprintf(csv.f, "epoch,epsilon,ln_epsilon\n");
    for (size_t e = 0; e < rep.per_epoch_epsilon.size(); ++e)
      std::fprintf(csv.f, "%zu,%.17g,%.17g\n", e, rep.per_epoch_epsilon[e], std::log(rep.per_epoch_epsilon[e]));
  }
  {
    File csv(out_dir + "/samples.csv");
    std::fprintf(csv.f, "scenario_id,mae,ssim\n");
    for (const auto& s : rep.per_sample) std::fprintf(csv.f, "%d,%.17g,%.17g\n", s.scenario_id, s.mae, s.ssim);
  }
  {
    File txt(out_dir + "/summary.txt");
    std::fprintf(txt.f, "setup %s\nseed %llu\nconfig_digest %s\ntrain_size %d\ntest_size %d\n",
                 rep.setup_id.c_str(), static_cast<unsigned long long>(rep.seed), rep.config_digest.c_str(),
                 rep.train_size, rep.test_size);
    std::fprintf(txt.f, "final_epsilon %.17g\naggregate_mae %.17g\naggregate_ssim %.17g\n", rep.final_epsilon,
                 rep.aggregate_mae, rep.aggregate_ssim);
  }
}

}  // namespace fwi::eval
