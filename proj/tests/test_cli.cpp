#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using testutil::run_cli;
using testutil::slurp;

namespace {

std::string scratch_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("til_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string write_config(const std::string& dir, const std::string& name,
                         const nlohmann::json& doc) {
  const std::string path = dir + "/" + name;
  std::ofstream out(path);
  out << doc.dump(2) << "\n";
  return path;
}

nlohmann::json small_config() {
  return {{"battery", {"talagrand"}}, {"resolution", 256}, {"seed", 1}};
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("help and argument errors") {
  const std::string dir = scratch_dir("args");
  CHECK(run_cli("--help", dir).code == 0);
  CHECK(run_cli("verify", dir).code == 2);  // --config is required
  CHECK(run_cli("verify --config does_not_exist.toml", dir).code == 2);

  const std::string cfg = write_config(dir, "cfg.json", small_config());
  CHECK(run_cli("verify --config cfg.json --battery no_such_statement", dir).code == 2);
  CHECK(run_cli("verify --config cfg.json --format xml", dir).code == 2);

  nlohmann::json empty = small_config();
  empty["battery"] = nlohmann::json::array();
  write_config(dir, "empty.json", empty);
  CHECK(run_cli("verify --config empty.json", dir).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("verify writes manifest artifacts and reports pass") {
  const std::string dir = scratch_dir("verify");
  write_config(dir, "cfg.json", small_config());
  testutil::CliResult r = run_cli("verify --config cfg.json --out run", dir);
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS:") != std::string::npos);

  nlohmann::json man = nlohmann::json::parse(slurp(dir + "/run.json"));
  CHECK(man["all_pass"].get<bool>());
  CHECK(man["seed"].get<unsigned long long>() == 1);
  CHECK(man["failed"].get<int>() == 0);
  CHECK(man["passed"].get<int>() > 0);
  CHECK(man["reports"].is_array());
  CHECK(man["reports"][0]["statement_id"] == "talagrand");
  CHECK(!man["config_digest"].get<std::string>().empty());

  const std::string md = slurp(dir + "/run.md");
  CHECK(md.find("talagrand") != std::string::npos);

  // same config and out path reproduce the manifest byte for byte
  const std::string first = slurp(dir + "/run.json");
  fs::remove(dir + "/run.json");
  CHECK(run_cli("verify --config cfg.json --out run", dir).code == 0);
  CHECK(slurp(dir + "/run.json") == first);

  // a different seed changes the manifest seed field
  CHECK(run_cli("verify --config cfg.json --seed 9 --out reseeded", dir).code == 0);
  nlohmann::json man2 = nlohmann::json::parse(slurp(dir + "/reseeded.json"));
  CHECK(man2["seed"].get<unsigned long long>() == 9);
  fs::remove_all(dir);
}

TEST_CASE("csv format emits the report table") {
  const std::string dir = scratch_dir("csv");
  write_config(dir, "cfg.json", small_config());
  CHECK(run_cli("verify --config cfg.json --format csv --out run", dir).code == 0);
  const std::string csv = slurp(dir + "/run.csv");
  auto lines = split_lines(csv);
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0] == "statement_id,instance,lhs,rhs,margin,tolerance,pass,empirical_constant");
  CHECK(lines[1].rfind("talagrand,", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("negative control battery fails with exit one") {
  const std::string dir = scratch_dir("negctl");
  write_config(dir, "cfg.json", small_config());
  testutil::CliResult r = run_cli("verify --config cfg.json --battery sandwich_false --out bad", dir);
  CHECK(r.code == 1);
  CHECK(r.out.find("FAIL:") != std::string::npos);
  nlohmann::json man = nlohmann::json::parse(slurp(dir + "/bad.json"));
  CHECK_FALSE(man["all_pass"].get<bool>());
  CHECK(man["failed"].get<int>() > 0);
  fs::remove_all(dir);
}

TEST_CASE("resolution sweep tightens the identity margin") {
  const std::string dir = scratch_dir("sweep");
  nlohmann::json cfg = {{"battery", {"mainbound"}}, {"resolution", 512}, {"seed", 4}};
  write_config(dir, "cfg.json", cfg);
  testutil::CliResult r =
      run_cli("sweep --config cfg.json --param resolution --values 512,1024 --out sw", dir);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir + "/sw_resolution_512.json"));
  CHECK(fs::exists(dir + "/sw_resolution_1024.json"));

  const std::string csv = slurp(dir + "/sw_sweep.csv");
  auto lines = split_lines(csv);
  REQUIRE(lines.size() >= 3);
  CHECK(lines[0] == "value,statement_id,instance,margin,empirical_constant");

  // rows pair up across values in generation order; margins shrink on refinement
  auto parse_first_margin = [&](const std::string& prefix) {
    for (const auto& line : lines) {
      if (line.rfind(prefix, 0) != 0) continue;
      std::vector<std::string> cells;
      std::string cell;
      std::istringstream is(line);
      while (std::getline(is, cell, ',')) cells.push_back(cell);
      return std::stod(cells.at(3));
    }
    return -1.0;
  };
  const double margin512 = parse_first_margin("512,mainbound,");
  const double margin1024 = parse_first_margin("1024,mainbound,");
  CHECK(margin512 >= 0.0);
  CHECK(margin1024 >= 0.0);
  CHECK(margin1024 <= margin512 + 1e-5);

  CHECK(run_cli("sweep --config cfg.json --param nope --values 1,2", dir).code == 2);
  CHECK(run_cli("sweep --config cfg.json --param resolution --values abc", dir).code == 2);
  CHECK(run_cli("sweep --config cfg.json --param resolution --values 1", dir).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("constants aggregation extracts the spectral ratio") {
  const std::string dir = scratch_dir("constants");
  nlohmann::json cfg = {{"battery", {"spectral"}}, {"resolution", 512}, {"seed", 2}};
  write_config(dir, "cfg.json", cfg);
  testutil::CliResult r = run_cli("constants --config cfg.json --out agg", dir);
  CHECK(r.code == 0);

  const std::string csv = slurp(dir + "/agg_constants.csv");
  auto lines = split_lines(csv);
  REQUIRE(!lines.empty());
  CHECK(lines[0] == "name,value");
  double ratio = -1.0;
  for (const auto& line : lines) {
    if (line.rfind("gap_over_h2,", 0) == 0) ratio = std::stod(line.substr(12));
  }
  CHECK(ratio == doctest::Approx(1.5707963267948966).epsilon(0.05));
  CHECK(fs::exists(dir + "/agg_constants.md"));
  fs::remove_all(dir);
}

#ifdef TIL_CONFIG_DIR
TEST_CASE("checked in negative control config fails") {
  const std::string dir = scratch_dir("fixture");
  const std::string cfg = std::string(TIL_CONFIG_DIR) + "/negative_control.toml";
  testutil::CliResult r = run_cli("verify --config '" + cfg + "' --out neg", dir);
  CHECK(r.code == 1);
  fs::remove_all(dir);
}
#endif
