#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gecforge/io.hpp"

namespace gecforge {

/// INI-style settings: "[section]" headers and "key = value" lines. Every
/// key must belong to the known schema; values are typed on access.
class PipelineConfig {
 public:
  PipelineConfig() = default;

  static PipelineConfig parse(const std::string& text, const std::string& origin);
  static PipelineConfig load(const std::filesystem::path& path);

  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& section, const std::string& key,
                       std::size_t fallback) const;
  std::optional<std::uint64_t> get_seed(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

  /// Comma-separated list value; empty when the key is absent.
  std::vector<std::string> get_list(const std::string& section, const std::string& key) const;

  /// SHA-256 over the canonical "section.key=value" lines, "-" when empty.
  std::string digest() const;

  const std::map<std::string, std::map<std::string, std::string>>& values() const {
    return values_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> values_;
};

/// Section -> allowed keys.
const std::map<std::string, std::vector<std::string>>& pipeline_config_schema();

std::uint64_t parse_seed(const std::string& text, const std::string& what);

/// One provenance record per CLI invocation.
struct RunRecord {
  std::string command;
  std::vector<std::string> arguments;
  std::string config_digest = "-";
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  std::string status = "ok";
  std::string error;
};

/// Appends the record as one JSON line. Inputs that exist are hashed with
/// SHA-256; missing ones are recorded with a null digest.
void append_run_record(const std::filesystem::path& path, const RunRecord& record);

}  // namespace gecforge
