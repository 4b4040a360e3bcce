#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fwi/cli/dispatch.hpp"
#include "fwi/geomodel/dataset.hpp"

using namespace fwi;
using namespace fwi::cli;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// small end-to-end footprint: few scenarios, short record, slim network
const char* kSmokeConfig = R"(
global.seed = 11
data.n_scenarios = 4
acq.record_time = 0.3
train.epochs = 2
train.batch_size = 4
net.encoder_widths = 4, 8, 8, 8, 8
net.decoder_widths = 8, 8, 8, 4, 4
)";

}  // namespace

TEST_CASE("empty config yields the documented defaults") {
  RunConfig c = parse_config("");
  CHECK(c.wavelet.peak_frequency == 25.0);
  CHECK(c.train.epochs == 250);
  CHECK(c.train.batch_size == 50);
  CHECK(c.train.lr == 1e-3);
  CHECK(c.grid.nz == 71);
  CHECK(c.grid.nx == 171);
  CHECK(c.data.n_scenarios == 200);
  CHECK(c.n_sources == 3);
  CHECK(c.n_receivers == 48);
  CHECK(!c.digest.empty());
}

TEST_CASE("unknown keys are hard errors with file and line") {
  try {
    parse_config_text("acq.record_time = 1.0\nepoks = 250\n", "bad.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& ex) {
    std::string msg = ex.what();
    CHECK(msg.find("epoks") != std::string::npos);
    CHECK(msg.find("bad.cfg:2") != std::string::npos);
  }
}

TEST_CASE("malformed values and invalid settings are rejected") {
  CHECK_THROWS_AS(parse_config_text("train.epochs = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("train.epochs 250\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("bounds.v_min = 3000\nbounds.v_max = 2000\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("net.encoder_widths = 8, 16\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("sim.free_surface_top = maybe\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("/no/such/config.cfg"), ConfigError);
}

TEST_CASE("config digest is stable under key reordering") {
  RunConfig a = parse_config_text("global.seed = 3\ntrain.lr = 0.01\n");
  RunConfig b = parse_config_text("train.lr = 0.01\nglobal.seed = 3\n");
  CHECK(a.digest == b.digest);
  RunConfig again = parse_config_text("global.seed = 3\ntrain.lr = 0.01\n");
  CHECK(a.digest == again.digest);
  RunConfig c = parse_config_text("global.seed = 4\ntrain.lr = 0.01\n");
  CHECK(a.digest != c.digest);
  // comments and whitespace do not change the digest
  RunConfig d = parse_config_text("  global.seed = 3   # the seed\n\ntrain.lr = 0.01\n");
  CHECK(a.digest == d.digest);
}

TEST_CASE("derived geometry and architecture are consistent") {
  RunConfig c = parse_config_text(kSmokeConfig);
  geomodel::AcquisitionGeometry g = c.make_geometry();
  CHECK(g.sources.size() == 3);
  CHECK(g.receivers.size() == 48);
  CHECK(g.dt > 0);
  CHECK(g.nt * g.dt >= c.record_time);
  neural::ArchitectureSpec arch = c.make_arch();
  CHECK(arch.t_samples == g.n_samples());
  CHECK(arch.out_rows == c.grid.nz);
  CHECK(arch.out_cols == c.grid.nx);
}

TEST_CASE("invalid commands and missing arguments exit with the usage code") {
  CommandArgs a;
  a.command = "frobnicate";
  a.out = "/tmp/fwi_cli_nowhere";
  CHECK(dispatch(a) == kConfigError);
  a.command = "train";
  a.out = "";
  CHECK(dispatch(a) == kConfigError);
  a.out = "/tmp/fwi_cli_nowhere";
  a.dataset = "";  // train requires --dataset
  CHECK(dispatch(a) == kConfigError);
}

TEST_CASE("generate, simulate, train smoke path") {
  namespace fs = std::filesystem;
  std::string root = (fs::temp_directory_path() / "fwi_cli_smoke").string();
  fs::remove_all(root);

  CommandArgs gen;
  gen.command = "generate-data";
  gen.config = parse_config_text(kSmokeConfig);
  gen.out = root + "/data";
  REQUIRE(dispatch(gen) == kOk);
  REQUIRE(fs::exists(gen.out + "/manifest.txt"));
  CHECK(fs::exists(gen.out + "/run_manifest.txt"));
  {
    geomodel::Dataset ds = geomodel::load_dataset(gen.out + "/manifest.txt");
    CHECK(ds.size() == 4);
    for (const auto& e : ds.entries) {
      CHECK(e.has_label());
      CHECK(!e.gather.has_value());
      CHECK(e.partition_tag != "all");
    }
  }

  CommandArgs sim;
  sim.command = "simulate";
  sim.config = gen.config;
  sim.dataset = gen.out + "/manifest.txt";
  sim.out = root + "/sim";
  REQUIRE(dispatch(sim) == kOk);
  {
    geomodel::Dataset ds = geomodel::load_dataset(sim.out + "/manifest.txt");
    CHECK(ds.size() == 4);
    for (const auto& e : ds.entries) CHECK(e.gather.has_value());
  }
  std::string manifest_bytes = slurp(sim.out + "/manifest.txt");

  // rerunning the same simulation reproduces the artifacts byte for byte
  CommandArgs sim2 = sim;
  sim2.out = root + "/sim2";
  REQUIRE(dispatch(sim2) == kOk);
  CHECK(slurp(sim2.out + "/manifest.txt") == manifest_bytes);
  for (const auto& f : fs::directory_iterator(sim.out))
    if (f.path().extension() == ".fwi1")
      CHECK(slurp(f.path().string()) == slurp(sim2.out + "/" + f.path().filename().string()));

  CommandArgs train;
  train.command = "train";
  train.config = gen.config;
  train.dataset = sim.out + "/manifest.txt";
  train.out = root + "/model";
  REQUIRE(dispatch(train) == kOk);
  CHECK(fs::exists(train.out + "/checkpoint.txt"));
  std::string loss = slurp(train.out + "/loss.csv");
  CHECK(std::count(loss.begin(), loss.end(), '\n') == 1 + gen.config.train.epochs);
  std::string rm = slurp(train.out + "/run_manifest.txt");
  CHECK(rm.find("command train") != std::string::npos);
  CHECK(rm.find("config_digest " + gen.config.digest) != std::string::npos);

  // data-level failures map to the data/I-O exit codes, not success
  CommandArgs bad = train;
  bad.dataset = root + "/missing/manifest.txt";
  bad.out = root + "/model_bad";
  int rc = dispatch(bad);
  CHECK(rc != kOk);
  CHECK(rc != kConfigError);

  fs::remove_all(root);
}
