#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "til/battery.hpp"
#include "til/config.hpp"
#include "til/errors.hpp"

namespace {

using namespace til;

struct CommonOpts {
  std::string config_path;
  std::optional<long long> seed;
  std::string battery_csv;
  std::string out;
  std::string format;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "run configuration (TOML or JSON)")->required();
  cmd->add_option("--seed", o.seed, "override the config seed");
  cmd->add_option("--battery", o.battery_csv, "comma-separated statement ids");
  cmd->add_option("--out", o.out, "output path prefix");
  cmd->add_option("--format", o.format, "json, csv or md");
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

RunConfig resolve_config(const CommonOpts& o) {
  RunConfig cfg = load_run_config(o.config_path);
  if (o.seed) {
    if (*o.seed < 0) throw ConfigError("config: seed must be nonnegative");
    cfg.seed = static_cast<unsigned long long>(*o.seed);
    cfg.raw["seed"] = *o.seed;
  }
  if (!o.battery_csv.empty()) {
    cfg.battery = split_csv(o.battery_csv);
    cfg.raw["battery"] = cfg.battery;
  }
  if (!o.out.empty()) {
    cfg.out_path = o.out;
    cfg.raw["out"] = o.out;
  }
  if (!o.format.empty()) {
    if (o.format != "json" && o.format != "csv" && o.format != "md")
      throw ConfigError("config: format must be json, csv or md");
    cfg.format = o.format;
    cfg.raw["format"] = o.format;
  }
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

int emit_manifest(const RunManifest& m, const RunConfig& cfg) {
  write_text(cfg.out_path + ".json", manifest_json(m).dump(2) + "\n");
  write_text(cfg.out_path + ".md", manifest_markdown(m));
  if (cfg.format == "csv") write_text(cfg.out_path + ".csv", reports_csv(m.reports));
  std::cout << (m.all_pass() ? "PASS" : "FAIL") << ": " << m.passed << " passed, " << m.failed
            << " failed; manifest at " << cfg.out_path << ".json\n";
  return m.all_pass() ? 0 : 1;
}

int cmd_verify(const CommonOpts& o) {
  RunConfig cfg = resolve_config(o);
  RunManifest m = run_battery(cfg);
  return emit_manifest(m, cfg);
}

int cmd_sweep(const CommonOpts& o, const std::string& param, const std::string& values_csv) {
  static const std::vector<std::string> known = {"eps", "c", "v", "sigma", "resolution"};
  if (std::find(known.begin(), known.end(), param) == known.end())
    throw ConfigError("sweep: unknown parameter '" + param + "'");
  std::vector<std::string> tokens = split_csv(values_csv);
  if (tokens.empty()) throw ConfigError("sweep: no values given");

  RunConfig base = resolve_config(o);
  std::ostringstream csv;
  csv << "value,statement_id,instance,margin,empirical_constant\n";
  bool all_pass = true;
  for (const auto& tok : tokens) {
    double value = 0.0;
    try {
      value = std::stod(tok);
    } catch (const std::exception&) {
      throw ConfigError("sweep: value '" + tok + "' is not a number");
    }
    RunConfig cfg = base;
    if (param == "eps") {
      cfg.battery = {"linearization"};
      cfg.raw["eps_list"] = {value};
    } else if (param == "c") {
      cfg.battery = {"thm2"};
      cfg.c_scan = {value};
      cfg.raw["c_scan"] = {value};
    } else if (param == "v") {
      cfg.battery = {"talagrand", "translation"};
      cfg.raw["v_list"] = {value};
    } else if (param == "sigma") {
      cfg.battery = {"spectral"};
      cfg.raw["sigma"] = value;
    } else {  // resolution
      const int res = static_cast<int>(value);
      if (res < 2 || res != value) throw ConfigError("sweep: resolution must be an integer >= 2");
      cfg.resolution = res;
      cfg.raw["resolution"] = res;
    }
    cfg.raw["sweep"] = {{"param", param}, {"value", value}};
    RunManifest m = run_battery(cfg);
    all_pass = all_pass && m.all_pass();

    std::string tag = tok;
    for (char& ch : tag)
      if (ch == '.' || ch == '-') ch = '_';
    RunConfig out_cfg = cfg;
    out_cfg.out_path = base.out_path + "_" + param + "_" + tag;
    emit_manifest(m, out_cfg);
    for (const auto& r : m.reports) {
      std::string inst = r.instance;
      for (char& ch : inst)
        if (ch == ',') ch = ';';
      csv << tok << ',' << r.statement_id << ',' << inst << ',' << r.margin << ',';
      if (r.empirical_constant) csv << *r.empirical_constant;
      csv << '\n';
    }
  }
  write_text(base.out_path + "_sweep.csv", csv.str());
  std::cout << "sweep table at " << base.out_path << "_sweep.csv\n";
  return all_pass ? 0 : 1;
}

int cmd_constants(const CommonOpts& o) {
  RunConfig cfg = resolve_config(o);
  RunManifest m = run_battery(cfg);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  double remainder_c = nan, bh_c = nan, trace_ratio = nan, gap_over_h2 = nan;
  for (const auto& r : m.reports) {
    if (!r.empirical_constant) continue;
    const double v = *r.empirical_constant;
    if (r.statement_id == "thm2")
      remainder_c = std::isnan(remainder_c) ? v : std::min(remainder_c, v);
    else if (r.statement_id == "bh")
      bh_c = std::isnan(bh_c) ? v : std::max(bh_c, v);
    else if (r.statement_id == "trace" && r.instance.rfind("random symmetric", 0) == 0)
      trace_ratio = std::isnan(trace_ratio) ? v : std::min(trace_ratio, v);
    else if (r.statement_id == "spectral" && r.instance.find("over h^2") != std::string::npos)
      gap_over_h2 = v;
  }

  std::ostringstream table;
  table << "| constant | extremal empirical value |\n|---|---|\n";
  char buf[64];
  auto row = [&](const char* name, double v) {
    std::snprintf(buf, sizeof buf, "%.6g", v);
    table << "| " << name << " | " << buf << " |\n";
  };
  row("remainder multiple (min deficit / capped cost)", remainder_c);
  row("oscillation bound multiple (max needed)", bh_c);
  row("trace over sphere average (min ratio)", trace_ratio);
  row("spectral gap over h^2", gap_over_h2);

  std::cout << table.str();
  write_text(cfg.out_path + "_constants.md", table.str());
  std::ostringstream csv;
  csv << "name,value\n"
      << "remainder_multiple," << remainder_c << "\n"
      << "oscillation_multiple," << bh_c << "\n"
      << "trace_ratio," << trace_ratio << "\n"
      << "gap_over_h2," << gap_over_h2 << "\n";
  write_text(cfg.out_path + "_constants.csv", csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for transport and variance inequalities"};
  app.require_subcommand(1);

  CommonOpts o;
  CLI::App* verify = app.add_subcommand("verify", "run the configured statement battery");
  add_common(verify, o);
  CLI::App* sweep = app.add_subcommand("sweep", "re-run a battery while sweeping one parameter");
  add_common(sweep, o);
  std::string param, values_csv;
  sweep->add_option("--param", param, "one of eps, c, v, sigma, resolution")->required();
  sweep->add_option("--values", values_csv, "comma-separated numeric values")->required();
  CLI::App* constants = app.add_subcommand("constants", "aggregate empirical constants");
  add_common(constants, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(verify)) return cmd_verify(o);
    if (app.got_subcommand(sweep)) return cmd_sweep(o, param, values_csv);
    return cmd_constants(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
