#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace til {

struct RunConfig {
  nlohmann::json potential;  // forwarded to potential_from_config
  double domain_lo = -8.0;
  double domain_hi = 8.0;
  int resolution = 1024;
  std::vector<std::string> battery;
  unsigned long long seed = 0;
  std::vector<double> c_scan{0.25, 0.5, 1.0};
  std::string out_path = "til_run";
  std::string format = "json";  // json, csv or md
  nlohmann::json raw;           // parsed source document, hashed for manifests
};

// Minimal TOML reader covering what run configs use: comments, [table] and
// [table.sub] headers, string/number/bool scalars and flat arrays.
nlohmann::json parse_toml_subset(const std::string& text);

// Accepts TOML (as above) or JSON, keyed off the first non-space byte.
RunConfig load_run_config(const std::string& path);

RunConfig run_config_from_json(const nlohmann::json& doc);

// FNV-1a over the canonical dump; stable across runs and platforms.
std::string config_hash(const nlohmann::json& doc);

// Worker cap: TIL_THREADS if set, else hardware concurrency, at least 1.
int thread_count();

}  // namespace til
