#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "postlab_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = "cd '" + workdir().string() + "' && '" POSTLAB_BIN "' " + args + " >out.log 2>err.log";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(workdir() / p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t c = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++c;
  return c;
}

}  // namespace

TEST_CASE("usage errors exit with 2 and help with 0") {
  CHECK(run("--help") == 0);
  CHECK(run("") == 2);
  CHECK(run("traj --no-such-flag") == 2);
  CHECK(run("traj --truth beta:3") == 2);
  CHECK(run("traj --grid-ratio 0.5") == 2);
  CHECK(run("traj --cosine-prior gamma:1 --model cosine") == 2);
  CHECK(run("traj --band 0.7:0.2") == 2);
}

TEST_CASE("traj writes a CSV and a sidecar that replays byte for byte") {
  REQUIRE(run("traj --truth uniform --n-max 80 --seed 4 --out a") == 0);
  const auto csv = slurp("a.csv");
  CHECK(csv.rfind("n,M,W_n,truth_loglik,mass_step.lower", 0) == 0);
  CHECK(fs::exists(workdir() / "a.json"));
  REQUIRE(run("traj --config a.json --out b") == 0);
  CHECK(slurp("b.csv") == csv);
  REQUIRE(run("traj --truth uniform --n-max 80 --seed 4") == 0);
  CHECK(slurp("traj_seed4.csv") == csv);
}

TEST_CASE("a config with unknown keys is rejected") {
  std::ofstream(workdir() / "bad.json") << R"({"n_max": 10, "colour": "red"})";
  CHECK(run("traj --config bad.json") == 2);
  std::ofstream(workdir() / "broken.json") << "{ not json";
  CHECK(run("traj --config broken.json") == 2);
}

TEST_CASE("numeric failures at grid points exit with 3 and leave NaN rows") {
  CHECK(run("traj --truth uniform --n-max 30 --truncation 1 --out fail") == 3);
  const auto csv = slurp("fail.csv");
  CHECK(csv.find("nan") != std::string::npos);
  const auto side = slurp("fail.json");
  CHECK(side.find("\"errors\"") != std::string::npos);
}

TEST_CASE("replicate output does not depend on --jobs") {
  REQUIRE(run("replicate --truth uniform --n-max 150 --seeds 1..6 --jobs 1 --out-dir j1") == 0);
  REQUIRE(run("replicate --truth uniform --n-max 150 --seeds 6,5,4,3,2,1 --jobs 8 --out-dir j8") == 0);
  for (int s = 1; s <= 6; ++s) {
    const std::string name = "seed_" + std::to_string(s) + ".csv";
    CHECK(slurp(fs::path("j1") / name) == slurp(fs::path("j8") / name));
  }
  CHECK(slurp("j1/summary.json").find("\"excursions\"") != std::string::npos);
}

TEST_CASE("replicate refuses colliding outputs") {
  CHECK(run("replicate --seeds 1,2 --n-max 5 --out-dir c --summary c/seed_1.csv") == 2);
  CHECK(run("replicate --seeds 1,1 --n-max 5 --out-dir c2") == 2);
}

TEST_CASE("scan writes one row per band and delta") {
  REQUIRE(run("scan --alpha-grid 0.2:0.6:0.4 --beta-grid 0.4:0.75:0.35 --delta-grid 0.25:0.5:0.25 "
              "--seeds 1..3 --n-max 100 --out scan.csv") == 0);
  const auto csv = slurp("scan.csv");
  CHECK(csv.rfind("alpha,beta,delta,frequency\n", 0) == 0);
  CHECK(count(csv, "\n") == 1 + 3 * 2);
  // 0.2 + 0.4 drifts to 0.60000000000000009 without snapping; 0.6 itself prints as below.
  CHECK(csv.find("0.59999999999999998,0.75") != std::string::npos);
  CHECK(run("scan --alpha-grid 0.9 --beta-grid 0.5 --n-max 10 --out e.csv") == 2);
}

TEST_CASE("plot renders series, bands, reference lines and a legend") {
  REQUIRE(run("traj --truth uniform --n-max 100 --seed 1 --out p") == 0);
  REQUIRE(run("plot --input p.csv --y mass_step --y W_n --refline 0.5 --refline 0.9 --log-x --title 'a & b' "
              "--out p.svg") == 0);
  const auto svg = slurp("p.svg");
  CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
  CHECK(count(svg, "<polyline class=\"series\"") == 2);
  CHECK(count(svg, "<polygon class=\"band\"") == 1);
  CHECK(count(svg, "<line class=\"refline\"") == 2);
  CHECK(svg.find("a &amp; b") != std::string::npos);
  CHECK(svg.find("<g class=\"legend\">") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(run("plot --input p.csv --y no_such_column --out q.svg") == 2);
  CHECK(slurp("err.log").find("no_such_column") != std::string::npos);
  CHECK(run("plot --input missing.csv --y n --out q.svg") == 2);
}

TEST_CASE("cosine model runs from the command line") {
  REQUIRE(run("traj --model cosine --cosine-prior half-cauchy:1 --n-max 40 --seed 2 --out cos") == 0);
  const auto csv = slurp("cos.csv");
  CHECK(csv.find("hellinger_mass:0.3.lower") != std::string::npos);
  CHECK(csv.find("tail_dominates") != std::string::npos);
}
