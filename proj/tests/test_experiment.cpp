#include "doctest.h"

#include <stdexcept>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "misodof/experiment.hpp"

using namespace misodof;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const char* env = std::getenv("MISODOF_TEST_TMP");
  fs::path base = env ? fs::path(env) : fs::temp_directory_path() / "misodof-tests";
  fs::path dir = base / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(const fs::path& out) {
  ExperimentConfig c;
  c.quality = CsitQuality(0.3, 0.5);
  c.schemes = {"case-ii", "sc-zf", "ges12-asym"};
  c.n_trials = 60;
  c.n_cycles = 4;
  c.output_dir = out;
  return c;
}

}  // namespace

TEST_CASE("config defaults and parsing") {
  const ExperimentConfig d;
  CHECK(d.p_grid_db == std::vector<double>{60, 80, 100, 120});
  CHECK(d.n_trials == 2000);
  CHECK(d.n_cycles == 50);
  CHECK(d.seed == 7);
  CHECK(d.tolerance == 0.05);

  const auto c = ExperimentConfig::from_json(R"({"alpha1": 0.2, "alpha2": 0.8, "schemes": ["case-i"], "seed": 3})");
  CHECK(c.quality == CsitQuality(0.2, 0.8));
  CHECK(c.schemes == std::vector<std::string>{"case-i"});
  CHECK(c.seed == 3);
  CHECK(c.n_cycles == 50);

  const auto round = ExperimentConfig::from_json(c.to_json());
  CHECK(round.quality == c.quality);
  CHECK(round.p_grid_db == c.p_grid_db);
  CHECK(round.output_dir == c.output_dir);
}

TEST_CASE("config rejects bad input") {
  CHECK_THROWS_AS(ExperimentConfig::from_json("{"), std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"trials": 5})"), std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"p_grid_db": [80, 60, 100]})"), std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"n_trials": 0})"), std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"n_cycles": 0})"), std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"schemes": []})"), std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"alpha1": 0.9, "alpha2": 0.1})"), std::invalid_argument);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"seed": "x"})"), std::invalid_argument);
  CHECK_THROWS(ExperimentConfig::load("/nonexistent/config.json"));
}

TEST_CASE("run writes ledger, report and region") {
  const auto out = scratch("run");
  const auto report = run(small_config(out));
  REQUIRE(report.results.size() == 3);
  CHECK(report.results[0].target.d1 == doctest::Approx(0.7));
  CHECK(report.results[0].target.d2 == doctest::Approx(0.9));
  for (const auto& r : report.results) {
    CHECK(r.inside_region);
    CHECK(r.pass == (r.max_deviation <= 0.05));
  }

  const auto csv = slurp(out / "ledger.csv");
  CHECK(csv.rfind("# misodof ledger v1, P = 10^(P_dB/10)", 0) == 0);
  CHECK(csv.find("\nscheme,alpha1,alpha2,P_dB,R1,R2,uses,d1_hat,d2_hat,stderr1,stderr2,seed\n") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 3 * 4);

  const auto rep = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(rep["schema_version"] == 1);
  CHECK(rep["results"].size() == 3);
  CHECK(rep["config"]["seed"] == 7);
  CHECK(rep.contains("wall_seconds"));

  const auto reg = nlohmann::json::parse(slurp(out / "region.json"));
  CHECK(reg["case"] == "three-line");
  CHECK_FALSE(fs::exists(out / "ledger.csv.tmp"));
}

TEST_CASE("same seed gives a byte-identical ledger") {
  const auto a = scratch("det-a"), b = scratch("det-b");
  auto ca = small_config(a), cb = small_config(b);
  cb.threads = 3;
  run(ca);
  run(cb);
  CHECK(slurp(a / "ledger.csv") == slurp(b / "ledger.csv"));
  auto cc = small_config(scratch("det-c"));
  cc.seed = 8;
  run(cc);
  CHECK(slurp(a / "ledger.csv") != slurp(cc.output_dir / "ledger.csv"));
}

TEST_CASE("scheme that does not fit the quality fails before simulating") {
  auto c = small_config(scratch("mismatch"));
  c.schemes = {"sc-zf", "case-i"};
  try {
    run(c);
    FAIL("expected domain_error");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("requires 2*alpha2 - alpha1 >= 1") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(c.output_dir / "ledger.csv"));
}

TEST_CASE("unwritable output is an I/O error") {
  const auto blocker = scratch("blocker");
  fs::create_directories(blocker.parent_path());
  std::ofstream(blocker) << "file";
  auto c = small_config(blocker / "sub");
  c.schemes = {"sc-zf"};
  CHECK_THROWS(run(c));
  fs::remove(blocker);
}

TEST_CASE("region export") {
  const auto dir = scratch("region");
  region_export(CsitQuality(0.2, 0.8), dir / "r.json");
  const auto j = nlohmann::json::parse(slurp(dir / "r.json"));
  CHECK(j["case"] == "upper-edge");
  CHECK(j["corners"].size() == 2);
  for (const auto& v : j["vertices"]) CHECK_FALSE(std::abs(v[1].get<double>() - 3.4 / 3) < 1e-9);

  const auto mat = nlohmann::json::parse(region_json(CsitQuality(0, 0)));
  CHECK(mat["vertices"].size() == 4);
  CHECK(mat["vertices"][2][0].get<double>() == doctest::Approx(2.0 / 3));

  const auto mid = nlohmann::json::parse(region_json(CsitQuality(0.3, 0.5)));
  bool has = false;
  for (const auto& v : mid["vertices"]) {
    has = has || (std::abs(v[0].get<double>() - 0.7) < 1e-12 && std::abs(v[1].get<double>() - 0.9) < 1e-12);
  }
  CHECK(has);
}

TEST_CASE("sweep routes each quality and records failures") {
  ExperimentConfig base;
  base.n_trials = 40;
  base.n_cycles = 3;
  base.output_dir = scratch("sweep");
  const std::vector<CsitQuality> qs{CsitQuality(0, 0.2), CsitQuality(0.25, 0.45), CsitQuality(0.5, 0.7),
                                    CsitQuality(0.2, 0.8)};
  const auto entries = sweep(qs, base);
  REQUIRE(entries.size() == 4);
  for (const auto& e : entries) {
    REQUIRE(e.report);
    const auto want = e.quality.max_sum_on_upper_edge() ? "case-i" : "case-ii";
    CHECK(e.report->results[0].scheme == want);
    CHECK(fs::exists(e.directory / "report.json"));
  }
  const auto index = nlohmann::json::parse(slurp(base.output_dir / "index.json"));
  CHECK(index["runs"].size() == 4);

  base.schemes = {"case-ii"};
  base.output_dir = scratch("sweep-errors");
  const std::vector<CsitQuality> mixed{CsitQuality(0.2, 0.8), CsitQuality(0.3, 0.5)};
  const auto e2 = sweep(mixed, base);
  CHECK_FALSE(e2[0].report);
  CHECK(e2[0].error.find("case-ii") != std::string::npos);
  CHECK(e2[1].report);
  const auto idx2 = nlohmann::json::parse(slurp(base.output_dir / "index.json"));
  CHECK(idx2["runs"][0]["status"] == "error");

  CHECK_THROWS_AS(sweep(std::vector<CsitQuality>{}, base), std::invalid_argument);
}

TEST_CASE("MAT point from a singleton sweep") {
  ExperimentConfig base;
  base.n_trials = 50;
  base.n_cycles = 5;
  base.output_dir = scratch("sweep-mat");
  const std::vector<CsitQuality> qs{CsitQuality(0, 0)};
  const auto e = sweep(qs, base);
  REQUIRE(e[0].report);
  CHECK(e[0].pass());
  CHECK(e[0].report->results[0].estimate.slope.d1 == doctest::Approx(2.0 / 3).epsilon(0.05 * 1.5));
}

TEST_CASE("quality labels") { CHECK(quality_label(CsitQuality(0.3, 0.5)) == "a1_0.3_a2_0.5"); }
