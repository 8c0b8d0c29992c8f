#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include "doctest.h"
#include "postlab/harness.hpp"

using namespace postlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("postlab_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig small_config() {
  RunConfig cfg;
  cfg.n_max = 60;
  cfg.seeds = {3, 1, 2};
  return cfg;
}

}  // namespace

TEST_CASE("evaluation grid") {
  const auto g = evaluation_grid(30, 1.5);
  const std::vector<std::size_t> expected{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 23, 30};
  CHECK(g == expected);
  CHECK(evaluation_grid(4, 1.15) == std::vector<std::size_t>{1, 2, 3, 4});
  CHECK_THROWS_AS(evaluation_grid(10, 1.0), ConfigError);
}

TEST_CASE("truth specifications") {
  CHECK(TruthSpec::parse("uniform").kind == TruthSpec::Kind::uniform);
  const auto g = TruthSpec::parse("gauss:0.5");
  CHECK(g.theta == 0.5);
  CHECK(g.to_string() == "gauss:0.5");
  CHECK(g.log_pdf(0.5) == doctest::Approx(-0.5));
  const auto s = TruthSpec::parse("step:2:0,3,5,6");
  CHECK(s.level == 2);
  CHECK(s.log_pdf(0.01) == doctest::Approx(std::log(2.0)));
  CHECK(std::isinf(s.log_pdf(0.2)));
  CHECK_THROWS_AS(TruthSpec::parse("gauss:2"), ConfigError);
  CHECK_THROWS_AS(TruthSpec::parse("step:2:0,1"), ConfigError);
  CHECK_THROWS_AS(TruthSpec::parse("beta:1"), ConfigError);
}

TEST_CASE("config JSON round trip and hash") {
  RunConfig cfg = small_config();
  cfg.truth = TruthSpec::parse("gauss:0.25");
  cfg.diagnostics.bands = {{0.1, 0.3}};
  const auto j = cfg.to_json();
  const auto back = RunConfig::from_json(j);
  CHECK(back.to_json() == j);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(config_hash(cfg).size() == 16);
  RunConfig other = cfg;
  other.n_max = 61;
  CHECK(config_hash(other) != config_hash(cfg));

  auto bad = j;
  bad["mystery"] = 1;
  CHECK_THROWS_AS(RunConfig::from_json(bad), ConfigError);
  auto wrong_type = j;
  wrong_type["n_max"] = "many";
  CHECK_THROWS_AS(RunConfig::from_json(wrong_type), ConfigError);
}

TEST_CASE("trajectories are deterministic per seed and sidecars replay") {
  const RunConfig cfg = small_config();
  const auto a = run_trajectory(cfg, 2);
  const auto b = run_trajectory(cfg, 2);
  CHECK(a.table.rows == b.table.rows);
  CHECK(a.errors.empty());
  CHECK(a.table.columns.back() == "status");
  CHECK(a.table.rows.size() == a.grid.size());

  const auto side = a.sidecar();
  CHECK(side["seed"] == 2);
  CHECK(side["version"] == kVersion);
  CHECK(side["config_hash"] == config_hash(cfg));
  const auto replay_cfg = RunConfig::from_json(side);
  REQUIRE(replay_cfg.seeds.size() == 1);
  const auto c = run_trajectory(replay_cfg, replay_cfg.seeds.front());
  CHECK(c.table.rows == a.table.rows);
}

TEST_CASE("replications do not depend on the number of workers") {
  const RunConfig cfg = small_config();
  const auto one = run_replications(cfg, 1);
  const auto many = run_replications(cfg, 8);
  REQUIRE(one.trajectories.size() == 3);
  CHECK(one.trajectories.front().seed == 1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(one.trajectories[i].table.rows == many.trajectories[i].table.rows);
  CHECK(one.summary == many.summary);
  CHECK(one.summary.contains("excursions"));
}

TEST_CASE("excursion frequency counts runs") {
  const RunConfig cfg = small_config();
  const auto res = run_replications(cfg, 2);
  const double f = excursion_frequency(res.trajectories, "gamma_stat", 0.5, 1.0);
  CHECK(f >= 0.0);
  CHECK(f <= 1.0);
  CHECK(excursion_frequency(res.trajectories, "gamma_stat", 2.0, 1.0) == 0.0);
}

TEST_CASE("band scans drop inverted bands") {
  RunConfig cfg = small_config();
  const auto cells = scan_bands(cfg, {0.2, 0.6}, {0.4, 0.75}, {0.5}, 2);
  CHECK(cells.size() == 3);
  CHECK_THROWS_AS(scan_bands(cfg, {0.8}, {0.4}, {0.5}, 1), ConfigError);
  cfg.model = ModelKind::cosine;
  CHECK_THROWS_AS(scan_bands(cfg, {0.2}, {0.4}, {0.5}, 1), ConfigError);
}

TEST_CASE("dataset ingestion") {
  const auto dir = scratch_dir("ingest");
  {
    std::ofstream(dir / "ok.csv") << "x\n0.1\n\n0.7\n";
    std::ofstream(dir / "bad.csv") << "0.1\nabc\n";
    std::ofstream(dir / "range.csv") << "0.1\n1.5\n";
  }
  CHECK(ingest_dataset(dir / "ok.csv") == std::vector<double>{0.1, 0.7});
  try {
    ingest_dataset(dir / "bad.csv");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  CHECK_THROWS_AS(ingest_dataset(dir / "range.csv"), ConfigError);
  CHECK_THROWS_AS(ingest_dataset(dir / "missing.csv"), ConfigError);

  RunConfig cfg;
  cfg.truth = TruthSpec::parse("file:" + (dir / "ok.csv").string());
  cfg.n_max = 5;
  CHECK_THROWS_AS(run_trajectory(cfg, 1), ConfigError);
  cfg.n_max = 2;
  CHECK(run_trajectory(cfg, 1).table.rows.size() == 2);
}

TEST_CASE("CSV persistence is exact") {
  CHECK(format_value(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_value(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_value(0.1) == "0.10000000000000001");
  const auto dir = scratch_dir("csv");
  const auto rec = run_trajectory(small_config(), 1);
  write_trajectory_csv(rec, dir / "t.csv");
  const auto t = read_trajectory_csv(dir / "t.csv");
  CHECK(t.columns == rec.table.columns);
  CHECK(t.rows == rec.table.rows);
  write_json(rec.sidecar(), dir / "t.json");
  CHECK(read_json(dir / "t.json") == rec.sidecar());
}

TEST_CASE("cosine trajectories") {
  RunConfig cfg;
  cfg.model = ModelKind::cosine;
  cfg.n_max = 20;
  const auto rec = run_trajectory(cfg, 1);
  CHECK(rec.errors.empty());
  CHECK(rec.table.find("hellinger_mass:0.3.upper").has_value());
  CHECK(rec.table.find("region_mass:5.lower").has_value());
}
