#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "spe/io.hpp"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(SPE_CLI_PATH) + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  std::string output;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (fgets(buf.data(), static_cast<int>(buf.size()), pipe)) output += buf.data();
  int status = pclose(pipe);
  return {WEXITSTATUS(status), output};
}

std::string tmp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("spe_cli_test_" + name);
  std::filesystem::remove_all(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("fit: mixture JSON contract and byte-identical reruns") {
  const std::string dir = tmp_dir("fit");
  auto r = run_cli("fit --scenario ii --n 250 --estimator spe-hist --S 64 --qbar 0.7 --seed 5 --out " + dir);
  REQUIRE(r.exit_code == 0);
  auto j = nlohmann::json::parse(spe::read_text_file(dir + "/mixture.json"));
  CHECK(j["S"] == 64);
  CHECK(j["weights"].size() == 64);
  double total = 0.0;
  for (double w : j["weights"]) total += w;
  CHECK(std::abs(total - 1.0) < 1e-9);
  CHECK(std::filesystem::exists(dir + "/grid.csv"));
  std::string first_mixture = spe::read_text_file(dir + "/mixture.json");
  std::string first_grid = spe::read_text_file(dir + "/grid.csv");

  auto r2 = run_cli("fit --scenario ii --n 250 --estimator spe-hist --S 64 --qbar 0.7 --seed 5 --out " + dir);
  REQUIRE(r2.exit_code == 0);
  CHECK(spe::read_text_file(dir + "/mixture.json") == first_mixture);
  CHECK(spe::read_text_file(dir + "/grid.csv") == first_grid);
}

TEST_CASE("fit: missing input file fails with no partial output") {
  const std::string dir = tmp_dir("fit_missing");
  auto r = run_cli("fit --input /nonexistent/sample.csv --estimator hist --seed 1 --out " + dir);
  CHECK(r.exit_code != 0);
  CHECK_FALSE(std::filesystem::exists(dir + "/histogram.json"));
  CHECK_FALSE(std::filesystem::exists(dir + "/grid.csv"));
}

TEST_CASE("fit: requires a seed") {
  const std::string dir = tmp_dir("fit_noseed");
  auto r = run_cli("fit --scenario ii --estimator hist --out " + dir);
  CHECK(r.exit_code != 0);
}

TEST_CASE("benchmark: smoke run writes one record per cell") {
  const std::string dir = tmp_dir("bench");
  auto r = run_cli("benchmark --scenario ring --n-list 50 --methods hist,em --reps 1 "
                   "--S 4 --qbar 0.7 --threads 2 --seed 3 --out " + dir);
  REQUIRE(r.exit_code == 0);
  std::string csv = spe::read_text_file(dir + "/records.csv");
  CHECK(csv.rfind("scenario,method,n,seed,ise,sqrt_ise,wall_ms", 0) == 0);
  int lines = 0;
  for (char c : csv) lines += c == '\n';
  CHECK(lines == 3);  // header + 2 methods x 1 rep
  auto agg = nlohmann::json::parse(spe::read_text_file(dir + "/aggregate.json"));
  CHECK(agg["failures"] == 0);
  CHECK(agg["aggregates"].size() == 2);
}

TEST_CASE("benchmark: c-sweep plans 40 cells, heatmap 40x33") {
  const std::string dir = tmp_dir("sweep");
  auto r = run_cli("benchmark --scenario ring --n-list 100 --methods spe-phist --sweep c "
                   "--dry-run --seed 1 --out " + dir);
  REQUIRE(r.exit_code == 0);
  auto plan = nlohmann::json::parse(spe::read_text_file(dir + "/plan.json"));
  CHECK(plan["cells"].size() == 40);

  auto r2 = run_cli("benchmark --scenario ring --n-list 100 --methods spe-phist --sweep c-qbar "
                    "--dry-run --seed 1 --out " + dir);
  REQUIRE(r2.exit_code == 0);
  auto plan2 = nlohmann::json::parse(spe::read_text_file(dir + "/plan.json"));
  CHECK(plan2["cells"].size() == 40 * 33);
}

TEST_CASE("demo-pathology: gamma setup emits both estimators' masses") {
  const std::string dir = tmp_dir("demo");
  auto r = run_cli("demo-pathology --scenario gamma --threads 2 --seed 11 --out " + dir);
  REQUIRE(r.exit_code == 0);
  auto j = nlohmann::json::parse(spe::read_text_file(dir + "/gamma_n250_S64_mass.json"));
  CHECK(j.contains("mass_direct"));
  CHECK(j.contains("mass_spe"));
  CHECK(j["n"] == 250);
  CHECK(j["S"] == 64);
  CHECK(std::filesystem::exists(dir + "/gamma_n250_S64_direct_grid.csv"));
  CHECK(std::filesystem::exists(dir + "/gamma_n250_S64_spe_grid.csv"));
}

TEST_CASE("classify: smoke run produces the requested number of rates") {
  const std::string dir = tmp_dir("classify");
  auto r = run_cli(std::string("classify --data ") + WDBC_DATA_PATH +
                   " --estimator kde-cv --reps 3 --threads 3 --seed 7 --out " + dir);
  REQUIRE(r.exit_code == 0);
  auto j = nlohmann::json::parse(spe::read_text_file(dir + "/report.json"));
  CHECK(j["rates"].size() + j["excluded"].get<int>() == 3);

  auto bad = run_cli(std::string("classify --data ") + WDBC_DATA_PATH +
                     " --estimator nonsense --reps 1 --seed 7 --out " + dir);
  CHECK(bad.exit_code != 0);
}
