#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "til/config.hpp"
#include "til/harness.hpp"

namespace til {

// Registered statement identifiers, sorted.  Each id maps to a fixed family of
// instances built deterministically from (config, seed).
const std::vector<std::string>& battery_statement_ids();

bool battery_has(const std::string& id);

// Runs every instance of one statement; reports come back in generation order.
std::vector<InequalityReport> run_battery_statement(const std::string& id, const RunConfig& cfg);

struct RunManifest {
  nlohmann::json config;
  std::string config_digest;
  unsigned long long seed = 0;
  std::vector<InequalityReport> reports;
  int passed = 0;
  int failed = 0;

  bool all_pass() const { return failed == 0; }
};

// Runs cfg.battery (must be nonempty, ids registered) and merges reports in
// statement-id order.  Instances of a statement run on the worker pool.
RunManifest run_battery(const RunConfig& cfg);

nlohmann::json manifest_json(const RunManifest& m);

// statement | instance | lhs | rhs | margin | tolerance | pass
std::string manifest_markdown(const RunManifest& m);

// Stable schema:
// statement_id,instance,lhs,rhs,margin,tolerance,pass,empirical_constant
std::string reports_csv(const std::vector<InequalityReport>& reports);

}  // namespace til
