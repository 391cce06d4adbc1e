#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace gecforge {

using Json = nlohmann::json;

std::string read_file(const std::filesystem::path& path);

/// Lines without their trailing '\n'. A final line lacking '\n' is kept.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames, so readers never see a
/// half-written artifact.
void write_file(const std::filesystem::path& path, std::string_view content);

void write_lines(const std::filesystem::path& path,
                 const std::vector<std::string>& lines);

std::vector<Json> read_jsonl(const std::filesystem::path& path);

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<Json>& records);

/// Hex SHA-256 of a file's bytes.
std::string file_digest(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

}  // namespace gecforge
