#include "til/config.hpp"

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "til/errors.hpp"

namespace til {

namespace {

std::string strip(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// removes a trailing comment that is not inside a string literal
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

nlohmann::json parse_scalar(const std::string& tok, int line_no) {
  std::string t = strip(tok);
  if (t.empty()) throw ConfigError("toml: empty value at line " + std::to_string(line_no));
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"')
      throw ConfigError("toml: unterminated string at line " + std::to_string(line_no));
    std::string out;
    for (size_t i = 1; i + 1 < t.size(); ++i) {
      if (t[i] == '\\' && i + 2 < t.size()) {
        ++i;
        switch (t[i]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: out += t[i];
        }
      } else {
        out += t[i];
      }
    }
    return out;
  }
  if (t == "true") return true;
  if (t == "false") return false;
  try {
    size_t used = 0;
    if (t.find_first_of(".eE") == std::string::npos) {
      long long v = std::stoll(t, &used);
      if (used == t.size()) return v;
    }
    double v = std::stod(t, &used);
    if (used == t.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("toml: cannot parse value '" + t + "' at line " + std::to_string(line_no));
}

nlohmann::json parse_value(const std::string& tok, int line_no) {
  std::string t = strip(tok);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']')
      throw ConfigError("toml: unterminated array at line " + std::to_string(line_no));
    nlohmann::json arr = nlohmann::json::array();
    std::string body = t.substr(1, t.size() - 2);
    std::string item;
    bool in_str = false;
    int depth = 0;
    for (char c : body) {
      if (c == '"') in_str = !in_str;
      if (!in_str && c == '[') ++depth;
      if (!in_str && c == ']') --depth;
      if (c == ',' && !in_str && depth == 0) {
        if (!strip(item).empty()) arr.push_back(parse_value(item, line_no));
        item.clear();
      } else {
        item += c;
      }
    }
    if (!strip(item).empty()) arr.push_back(parse_value(item, line_no));
    return arr;
  }
  return parse_scalar(t, line_no);
}

}  // namespace

nlohmann::json parse_toml_subset(const std::string& text) {
  nlohmann::json doc = nlohmann::json::object();
  nlohmann::json* table = &doc;
  std::istringstream in(text);
  std::string line;
  std::string pending;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string piece = strip(strip_comment(line));
    if (piece.empty() && pending.empty()) continue;
    if (!pending.empty() && !piece.empty()) pending += ' ';
    pending += piece;
    // arrays may span lines; wait until brackets balance
    {
      int depth = 0;
      bool in_str = false;
      for (char c : pending) {
        if (c == '"') in_str = !in_str;
        if (!in_str && c == '[') ++depth;
        if (!in_str && c == ']') --depth;
      }
      if (depth > 0) continue;
    }
    std::string s = pending;
    pending.clear();
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("toml: malformed table header at line " + std::to_string(line_no));
      std::string path = strip(s.substr(1, s.size() - 2));
      if (path.empty())
        throw ConfigError("toml: empty table name at line " + std::to_string(line_no));
      table = &doc;
      std::istringstream ps(path);
      std::string part;
      while (std::getline(ps, part, '.')) {
        part = strip(part);
        if (part.empty())
          throw ConfigError("toml: empty table segment at line " + std::to_string(line_no));
        table = &(*table)[part];
        if (table->is_null()) *table = nlohmann::json::object();
      }
      continue;
    }
    size_t eq = std::string::npos;
    {
      bool in_str = false;
      for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_str = !in_str;
        if (s[i] == '=' && !in_str) {
          eq = i;
          break;
        }
      }
    }
    if (eq == std::string::npos)
      throw ConfigError("toml: expected key = value at line " + std::to_string(line_no));
    std::string key = strip(s.substr(0, eq));
    if (key.empty()) throw ConfigError("toml: empty key at line " + std::to_string(line_no));
    if (key.front() == '"' && key.back() == '"' && key.size() >= 2)
      key = key.substr(1, key.size() - 2);
    (*table)[key] = parse_value(s.substr(eq + 1), line_no);
  }
  if (!strip(pending).empty())
    throw ConfigError("toml: unterminated array at end of file");
  return doc;
}

RunConfig run_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config: document must be a table");
  RunConfig cfg;
  cfg.raw = doc;
  if (!doc.contains("seed")) throw ConfigError("config: seed is mandatory");
  if (!doc["seed"].is_number_integer())
    throw ConfigError("config: seed must be an integer");
  long long seed = doc["seed"].get<long long>();
  if (seed < 0) throw ConfigError("config: seed must be nonnegative");
  cfg.seed = static_cast<unsigned long long>(seed);

  if (doc.contains("potential")) {
    if (!doc["potential"].is_object()) throw ConfigError("config: potential must be a table");
    cfg.potential = doc["potential"];
  }
  if (doc.contains("domain")) {
    const auto& d = doc["domain"];
    if (!d.is_array() || d.size() != 2 || !d[0].is_number() || !d[1].is_number())
      throw ConfigError("config: domain must be [lo, hi]");
    cfg.domain_lo = d[0].get<double>();
    cfg.domain_hi = d[1].get<double>();
    if (!(cfg.domain_lo < cfg.domain_hi)) throw ConfigError("config: domain must satisfy lo < hi");
  }
  if (doc.contains("resolution")) {
    if (!doc["resolution"].is_number_integer())
      throw ConfigError("config: resolution must be an integer");
    cfg.resolution = doc["resolution"].get<int>();
    if (cfg.resolution < 2) throw ConfigError("config: resolution must be at least 2");
  }
  if (doc.contains("battery")) {
    if (!doc["battery"].is_array()) throw ConfigError("config: battery must be an array");
    for (const auto& id : doc["battery"]) {
      if (!id.is_string()) throw ConfigError("config: battery entries must be strings");
      cfg.battery.push_back(id.get<std::string>());
    }
  }
  if (doc.contains("c_scan")) {
    if (!doc["c_scan"].is_array()) throw ConfigError("config: c_scan must be an array");
    cfg.c_scan.clear();
    for (const auto& v : doc["c_scan"]) {
      if (!v.is_number()) throw ConfigError("config: c_scan entries must be numbers");
      cfg.c_scan.push_back(v.get<double>());
    }
  }
  if (doc.contains("out")) {
    if (!doc["out"].is_string()) throw ConfigError("config: out must be a string");
    cfg.out_path = doc["out"].get<std::string>();
  }
  if (doc.contains("format")) {
    if (!doc["format"].is_string()) throw ConfigError("config: format must be a string");
    cfg.format = doc["format"].get<std::string>();
    if (cfg.format != "json" && cfg.format != "csv" && cfg.format != "md")
      throw ConfigError("config: format must be json, csv or md");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  size_t first = text.find_first_not_of(" \t\r\n");
  nlohmann::json doc;
  if (first != std::string::npos && text[first] == '{') {
    doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config: invalid JSON in " + path);
  } else {
    doc = parse_toml_subset(text);
  }
  return run_config_from_json(doc);
}

std::string config_hash(const nlohmann::json& doc) {
  const std::string s = doc.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return std::string(out);
}

int thread_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  const char* env = std::getenv("TIL_THREADS");
  if (env != nullptr) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<int>(std::min<long>(v, hw));
  }
  return hw;
}

}  // namespace til
