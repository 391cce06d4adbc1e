#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gecforge/tokens.hpp"

namespace gecforge {

/// A (source, target) sentence pair. For synthetic data source is the
/// corrupted sentence and target the original.
struct SentencePair {
  std::string id;
  TokenSeq source;
  TokenSeq target;

  bool operator==(const SentencePair&) const = default;
};

enum class PairLayout { TwinFiles, TabSeparated };

PairLayout parse_pair_layout(const std::string& name);
std::string to_string(PairLayout layout);

/// Files written for `prefix`: "<prefix>.src" + "<prefix>.tgt" (twin) or
/// "<prefix>.tsv" (source TAB target).
std::vector<std::filesystem::path> pair_paths(const std::filesystem::path& prefix,
                                              PairLayout layout);

/// Rejects tokens that would break the layout (tabs in TSV, any whitespace
/// or empty token in either) with a FormatError.
void write_pairs(const std::filesystem::path& prefix, PairLayout layout,
                 const std::vector<SentencePair>& pairs);

/// Ids are not stored in pair files; read pairs get ids "1".."n".
std::vector<SentencePair> read_pairs(const std::filesystem::path& prefix,
                                     PairLayout layout);

}  // namespace gecforge
