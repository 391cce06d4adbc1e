#include "gecforge/pipeline_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "gecforge/error.hpp"
#include "gecforge/tokens.hpp"

namespace gecforge {

const std::map<std::string, std::vector<std::string>>& pipeline_config_schema() {
  static const std::map<std::string, std::vector<std::string>> schema = {
      {"ingest", {"min_len", "max_len", "abbreviations", "drop_duplicates", "workers",
                  "validation", "test", "seed"}},
      {"corrupt", {"p_delete", "p_add", "p_replace", "sigma", "seed", "workers", "layout"}},
      {"classify", {"workers"}},
      {"sample", {"n_per_category", "seed"}},
      {"annotate", {"mode", "annotators_per_item", "lease_minutes", "annotators", "host",
                    "port"}},
      {"eval", {"n_per_type", "seed", "language"}},
      {"judge", {"affirmations", "negations", "beta"}},
  };
  return schema;
}

std::uint64_t parse_seed(const std::string& text, const std::string& what) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size())
    throw ConfigError(what + ": seed must be a non-negative integer, got '" + text + "'");
  return v;
}

PipelineConfig PipelineConfig::parse(const std::string& text, const std::string& origin) {
  PipelineConfig cfg;
  const auto& schema = pipeline_config_schema();
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    std::string s(trim(line));
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = std::string(trim(s.substr(1, s.size() - 2)));
      if (!schema.count(section)) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    if (section.empty()) throw ConfigError(where + ": key outside any [section]");
    std::string key(trim(s.substr(0, eq))), value(trim(s.substr(eq + 1)));
    if (key == "api_key")
      throw ConfigError(where + ": API keys are read from the environment only");
    const auto& allowed = schema.at(section);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(where + ": unknown key '" + key + "' in [" + section + "]");
    if (cfg.values_[section].count(key))
      throw ConfigError(where + ": duplicate key '" + key + "' in [" + section + "]");
    cfg.values_[section][key] = value;
  }
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  return parse(read_file(path), path.string());
}

std::optional<std::string> PipelineConfig::get(const std::string& section,
                                               const std::string& key) const {
  auto s = values_.find(section);
  if (s == values_.end()) return std::nullopt;
  auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

std::string PipelineConfig::get_string(const std::string& section, const std::string& key,
                                       const std::string& fallback) const {
  return get(section, key).value_or(fallback);
}

double PipelineConfig::get_double(const std::string& section, const std::string& key,
                                  double fallback) const {
  auto v = get(section, key);
  if (!v) return fallback;
  double d = 0;
  auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), d);
  if (ec != std::errc() || end != v->data() + v->size())
    throw ConfigError("[" + section + "] " + key + ": expected a number, got '" + *v + "'");
  return d;
}

std::size_t PipelineConfig::get_size(const std::string& section, const std::string& key,
                                     std::size_t fallback) const {
  auto v = get(section, key);
  if (!v) return fallback;
  std::size_t n = 0;
  auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), n);
  if (ec != std::errc() || end != v->data() + v->size())
    throw ConfigError("[" + section + "] " + key + ": expected a non-negative integer, got '" +
                      *v + "'");
  return n;
}

std::optional<std::uint64_t> PipelineConfig::get_seed(const std::string& section,
                                                      const std::string& key) const {
  auto v = get(section, key);
  if (!v) return std::nullopt;
  return parse_seed(*v, "[" + section + "] " + key);
}

bool PipelineConfig::get_bool(const std::string& section, const std::string& key,
                              bool fallback) const {
  auto v = get(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError("[" + section + "] " + key + ": expected true or false, got '" + *v + "'");
}

std::vector<std::string> PipelineConfig::get_list(const std::string& section,
                                                  const std::string& key) const {
  std::vector<std::string> out;
  auto v = get(section, key);
  if (!v) return out;
  for (auto& f : split_fields(*v, ',')) {
    auto t = trim(f);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::string PipelineConfig::digest() const {
  if (values_.empty()) return "-";
  std::string canon;
  for (const auto& [section, kv] : values_)
    for (const auto& [k, v] : kv) canon += section + "." + k + "=" + v + "\n";
  return sha256_hex(canon);
}

void append_run_record(const std::filesystem::path& path, const RunRecord& record) {
  Json inputs = Json::array();
  for (const auto& p : record.inputs)
    inputs.push_back({{"path", p.string()},
                      {"sha256", std::filesystem::is_regular_file(p) ? Json(file_digest(p))
                                                                     : Json(nullptr)}});
  Json outputs = Json::array();
  for (const auto& p : record.outputs) outputs.push_back(p.string());
  Json j = {{"command", record.command},
            {"arguments", record.arguments},
            {"config_sha256", record.config_digest},
            {"seeds", record.seeds},
            {"inputs", inputs},
            {"outputs", outputs},
            {"status", record.status}};
  if (!record.error.empty()) j["error"] = record.error;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open run record");
  out << j.dump() << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace gecforge
