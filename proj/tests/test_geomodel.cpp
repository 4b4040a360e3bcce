#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "fwi/core/rng.hpp"
#include "fwi/geomodel/dataset.hpp"
#include "fwi/geomodel/generate.hpp"

using namespace fwi;
using namespace fwi::geomodel;

namespace {
GridSpec small_grid() { return {20, 30, 10.0, 10.0}; }
}  // namespace

TEST_CASE("GridSpec and VelocityMap invariants") {
  CHECK_THROWS_AS((GridSpec{4, 30, 10, 10}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpec{20, 30, -1, 10}.validate()), std::invalid_argument);
  VelocityMap m{small_grid(), Array2Dd(20, 30, 2000.0)};
  CHECK_NOTHROW(m.validate());
  m.vp(0, 0) = 100.0;  // below the 300 m/s floor
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("single layer, zero perturbation: uniform map") {
  VelocityMap m = make_layered_background(small_grid(), {2000.0}, {200.0}, 7, 0.0);
  for (double v : m.vp.raw()) CHECK(v == 2000.0);
}

TEST_CASE("two equal layers land within 1% of their velocities") {
  VelocityMap m = make_layered_background(small_grid(), {1500.0, 2500.0}, {100.0, 100.0}, 7);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 30; ++j) {
      double expect = i < 10 ? 1500.0 : 2500.0;
      CHECK(std::abs(m.vp(i, j) - expect) <= 0.01 * expect + 1e-9);
    }
}

TEST_CASE("layered background is seed-deterministic") {
  VelocityMap a = make_layered_background(small_grid(), {1500, 2200, 3000}, {70, 70, 60}, 123);
  VelocityMap b = make_layered_background(small_grid(), {1500, 2200, 3000}, {70, 70, 60}, 123);
  CHECK(a.vp == b.vp);
  VelocityMap c = make_layered_background(small_grid(), {1500, 2200, 3000}, {70, 70, 60}, 124);
  CHECK_FALSE(a.vp == c.vp);
}

TEST_CASE("make_layered_background rejects bad input") {
  CHECK_THROWS_AS(make_layered_background(small_grid(), {}, {}, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_layered_background(small_grid(), {6000.0}, {200.0}, 1), std::invalid_argument);
  // thicknesses must cover the domain depth
  CHECK_THROWS_AS(make_layered_background(small_grid(), {2000.0}, {50.0}, 1), std::invalid_argument);
}

TEST_CASE("embed_plume with zero drop returns background exactly") {
  VelocityMap bg = make_layered_background(small_grid(), {2000.0}, {200.0}, 1, 0.0);
  PlumeScenario sc;
  sc.background = bg;
  sc.center_x = 150;
  sc.center_z = 100;
  sc.extent_x = 40;
  sc.extent_z = 25;
  sc.velocity_drop = 0;
  // velocity_drop 0 is outside the (0, 0.3] validity window for dataset
  // scenarios but embed_plume treats it as "no plume"
  VelocityMap out = embed_plume(bg, sc);
  CHECK(out.vp == bg.vp);
}

TEST_CASE("embed_plume center cell hits (1 - drop) * background") {
  GridSpec g = small_grid();
  VelocityMap bg{g, Array2Dd(20, 30, 2000.0)};
  PlumeScenario sc;
  sc.background = bg;
  // center aligned with a cell center so the Gaussian peak is sampled exactly
  sc.center_x = (14 + 0.5) * g.dx;
  sc.center_z = (9 + 0.5) * g.dz;
  sc.extent_x = 40;
  sc.extent_z = 25;
  sc.velocity_drop = 0.1;
  sc.plume_mass_proxy = mass_proxy(sc.extent_x, sc.extent_z, sc.velocity_drop);
  VelocityMap out = embed_plume(bg, sc);
  CHECK(std::abs(out.vp(9, 14) - 1800.0) <= 1.0);
}

TEST_CASE("embed_plume untouched outside 3 sigma and bounded below") {
  GridSpec g = small_grid();
  VelocityMap bg = make_layered_background(g, {1800, 2400}, {100, 100}, 3);
  PlumeScenario sc;
  sc.background = bg;
  sc.center_x = 150;
  sc.center_z = 100;
  sc.extent_x = 20;
  sc.extent_z = 15;
  sc.velocity_drop = 0.25;
  VelocityMap out = embed_plume(bg, sc);
  double bg_min = *std::min_element(bg.vp.raw().begin(), bg.vp.raw().end());
  double out_min = *std::min_element(out.vp.raw().begin(), out.vp.raw().end());
  CHECK(out_min >= (1 - sc.velocity_drop) * bg_min - 1e-12);
  for (int i = 0; i < g.nz; ++i)
    for (int j = 0; j < g.nx; ++j) {
      double ux = ((j + 0.5) * g.dx - sc.center_x) / sc.extent_x;
      double uz = ((i + 0.5) * g.dz - sc.center_z) / sc.extent_z;
      if (ux * ux + uz * uz > 9.0) CHECK(out.vp(i, j) == bg.vp(i, j));
      // monotone: a plume never raises velocity
      CHECK(out.vp(i, j) <= bg.vp(i, j));
    }
}

TEST_CASE("embed_plume monotone in velocity_drop") {
  VelocityMap bg = make_layered_background(small_grid(), {2000.0}, {200.0}, 5);
  PlumeScenario sc;
  sc.background = bg;
  sc.center_x = 150;
  sc.center_z = 100;
  sc.extent_x = 30;
  sc.extent_z = 20;
  sc.velocity_drop = 0.1;
  VelocityMap light = embed_plume(bg, sc);
  sc.velocity_drop = 0.3;
  VelocityMap heavy = embed_plume(bg, sc);
  for (size_t k = 0; k < light.vp.size(); ++k) CHECK(heavy.vp.data()[k] <= light.vp.data()[k] + 1e-12);
}

TEST_CASE("elastic_from_vp closure values") {
  GridSpec g = small_grid();
  VelocityMap m{g, Array2Dd(20, 30, 3000.0)};
  ElasticModel e = elastic_from_vp(m);
  CHECK(std::abs(e.vs(0, 0) - 1732.05) <= 0.01);
  m.vp.fill(2000.0);
  e = elastic_from_vp(m);
  CHECK(std::abs(e.rho(0, 0) - 310.0 * std::pow(2000.0, 0.25)) <= 0.5);
  // vs/vp ratio is 1/sqrt(3) everywhere, for any input
  VelocityMap r = make_layered_background(g, {1600, 2400, 3200}, {70, 70, 60}, 2);
  e = elastic_from_vp(r);
  for (size_t k = 0; k < r.vp.size(); ++k)
    CHECK(e.vs.data()[k] / e.vp.data()[k] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK_NOTHROW(e.validate());
}

TEST_CASE("elastic_from_vp round-trips through the Lame parameters") {
  VelocityMap m = make_layered_background(small_grid(), {1600, 2400, 3200}, {70, 70, 60}, 2);
  ElasticModel e = elastic_from_vp(m);
  for (int i = 0; i < m.grid.nz; ++i)
    for (int j = 0; j < m.grid.nx; ++j) {
      double vp = std::sqrt((e.lame_lambda(i, j) + 2 * e.mu(i, j)) / e.rho(i, j));
      CHECK(std::abs(vp - m.vp(i, j)) / m.vp(i, j) <= 1e-10);
    }
}

TEST_CASE("generate_dataset determinism and invariants") {
  GridSpec g{71, 171, 10, 10};
  DatasetGenConfig cfg;
  cfg.n_scenarios = 12;
  cfg.min_mass_proxy = 100;
  cfg.max_mass_proxy = 900;
  cfg.seed = 11;
  Dataset a = generate_dataset(g, cfg);
  Dataset b = generate_dataset(g, cfg);
  REQUIRE(a.size() == 12);
  for (size_t k = 0; k < a.size(); ++k) {
    CHECK(a.entries[k].label().vp == b.entries[k].label().vp);
    CHECK(a.entries[k].plume_mass_proxy == b.entries[k].plume_mass_proxy);
    CHECK(a.entries[k].plume_mass_proxy >= cfg.min_mass_proxy);
    CHECK(a.entries[k].plume_mass_proxy <= cfg.max_mass_proxy);
    CHECK_NOTHROW(a.entries[k].label().validate());
  }
  cfg.min_mass_proxy = 900;  // degenerate range
  CHECK_THROWS_AS(generate_dataset(g, cfg), std::invalid_argument);
}

TEST_CASE("generate_dataset spreads mass log-uniformly") {
  GridSpec g{71, 171, 10, 10};
  DatasetGenConfig cfg;
  cfg.n_scenarios = 200;
  cfg.min_mass_proxy = 20;  // two decades
  cfg.max_mass_proxy = 2000;
  cfg.seed = 4;
  Dataset ds = generate_dataset(g, cfg);
  std::vector<double> proxies;
  for (const auto& e : ds.entries) proxies.push_back(e.plume_mass_proxy);
  std::sort(proxies.begin(), proxies.end());
  // analytic log-uniform quantiles: exp(log(min) + q * log(max/min))
  for (double q : {0.25, 0.5, 0.75}) {
    double expect = std::exp(std::log(20.0) + q * std::log(100.0));
    double got = proxies[static_cast<size_t>(q * 200)];
    CHECK(std::abs(got - expect) / expect <= 0.15);
  }
}

TEST_CASE("partition_by_size splits 20/20/20/40 with sorted boundaries") {
  GridSpec g{71, 171, 10, 10};
  DatasetGenConfig cfg;
  cfg.n_scenarios = 10;
  cfg.min_mass_proxy = 100;
  cfg.max_mass_proxy = 900;
  cfg.seed = 3;
  Dataset ds = generate_dataset(g, cfg);
  SizePartitions p = partition_by_size(ds);
  CHECK(p.tiny.size() == 2);
  CHECK(p.small.size() == 2);
  CHECK(p.medium.size() == 2);
  CHECK(p.large.size() == 4);
  auto max_proxy = [](const Dataset& d) {
    double m = 0;
    for (const auto& e : d.entries) m = std::max(m, e.plume_mass_proxy);
    return m;
  };
  auto min_proxy = [](const Dataset& d) {
    double m = 1e300;
    for (const auto& e : d.entries) m = std::min(m, e.plume_mass_proxy);
    return m;
  };
  CHECK(max_proxy(p.tiny) <= min_proxy(p.small));
  CHECK(max_proxy(p.small) <= min_proxy(p.medium));
  CHECK(max_proxy(p.medium) <= min_proxy(p.large));
  // partition property: disjoint, union = input
  std::vector<int> ids;
  for (const Dataset* d : {&p.tiny, &p.small, &p.medium, &p.large})
    for (const auto& e : d->entries) ids.push_back(e.scenario_id);
  std::sort(ids.begin(), ids.end());
  std::vector<int> expect_ids;
  for (const auto& e : ds.entries) expect_ids.push_back(e.scenario_id);
  std::sort(expect_ids.begin(), expect_ids.end());
  CHECK(ids == expect_ids);
  CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
}

TEST_CASE("partition_by_size tie-break by scenario_id keeps cardinalities") {
  Dataset ds;
  for (int i = 0; i < 10; ++i) {
    DatasetEntry e;
    e.scenario_id = 9 - i;  // shuffled ids, identical proxies
    e.plume_mass_proxy = 500.0;
    ds.entries.push_back(e);
  }
  SizePartitions p = partition_by_size(ds);
  CHECK(p.tiny.size() == 2);
  CHECK(p.small.size() == 2);
  CHECK(p.medium.size() == 2);
  CHECK(p.large.size() == 4);
  CHECK(p.tiny.entries[0].scenario_id == 0);
  CHECK(p.tiny.entries[1].scenario_id == 1);
  CHECK(p.large.entries.back().scenario_id == 9);
}

TEST_CASE("partition_by_size needs at least 4 entries") {
  Dataset ds;
  for (int i = 0; i < 3; ++i) {
    DatasetEntry e;
    e.scenario_id = i;
    e.plume_mass_proxy = i + 1;
    ds.entries.push_back(e);
  }
  CHECK_THROWS_AS(partition_by_size(ds), std::invalid_argument);
}

TEST_CASE("dataset manifest round-trip keeps labels, tags, provenance") {
  GridSpec g{71, 171, 10, 10};
  DatasetGenConfig cfg;
  cfg.n_scenarios = 5;
  cfg.min_mass_proxy = 100;
  cfg.max_mass_proxy = 900;
  cfg.seed = 8;
  Dataset ds = generate_dataset(g, cfg);
  ds.entries[2].partition_tag = "medium";
  ds.entries[3].provenance = "augmented@round_1";
  std::string dir = (std::filesystem::temp_directory_path() / "fwi_test_ds").string();
  std::filesystem::remove_all(dir);
  save_dataset(ds, dir);
  Dataset back = load_dataset(dir + "/manifest.txt");
  REQUIRE(back.size() == ds.size());
  for (size_t k = 0; k < ds.size(); ++k) {
    CHECK(back.entries[k].scenario_id == ds.entries[k].scenario_id);
    CHECK(back.entries[k].partition_tag == ds.entries[k].partition_tag);
    CHECK(back.entries[k].provenance == ds.entries[k].provenance);
    CHECK(back.entries[k].plume_mass_proxy == doctest::Approx(ds.entries[k].plume_mass_proxy));
    REQUIRE(back.entries[k].has_label());
    // labels pass through f32 storage
    for (size_t i = 0; i < ds.entries[k].label().vp.size(); ++i)
      CHECK(back.entries[k].label().vp.data()[i] ==
            doctest::Approx(ds.entries[k].label().vp.data()[i]).epsilon(1e-6));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("label access guard trips loudly") {
  DatasetEntry e;
  e.scenario_id = 3;
  e.label_value = VelocityMap{small_grid(), Array2Dd(20, 30, 2000.0)};
  CHECK_NOTHROW(e.label());
  e.label_guarded = true;
  CHECK_THROWS_AS(e.label(), std::logic_error);
  DatasetEntry unlabeled;
  CHECK_THROWS_AS(unlabeled.label(), std::logic_error);
}

TEST_CASE("mass_proxy is area times drop") {
  CHECK(mass_proxy(40, 25, 0.1) == doctest::Approx(M_PI * 40 * 25 * 0.1));
}
