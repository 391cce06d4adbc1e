#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gecforge/aligner.hpp"
#include "gecforge/labels.hpp"
#include "gecforge/model_bridge.hpp"

namespace gecforge::selector {

inline constexpr std::size_t kDefaultPerCategory = 300;

struct CategorySample {
  std::vector<std::string> ids;  // sorted
  std::size_t available = 0;
  std::size_t shortfall = 0;
};

struct SampleManifest {
  std::map<aligner::ErrorCategory, CategorySample> per_category;  // nine pure categories
  std::size_t n_per_category = kDefaultPerCategory;
  std::uint64_t seed = 0;

  std::vector<std::string> all_ids() const;
};

/// Seeded uniform sample without replacement within each of the nine pure
/// categories; a short category is taken whole and its shortfall recorded.
/// Each category draws from its own seed stream over its ids in sorted
/// order, so the result is independent of candidate order.
SampleManifest stratified_sample(const model_bridge::CandidateSet& candidates,
                                 std::size_t n_per_category, std::uint64_t seed);

void write_manifest(const std::filesystem::path& path, const SampleManifest& manifest);
SampleManifest read_manifest(const std::filesystem::path& path);

/// Columns: category, available, sampled, shortfall.
std::string render_manifest_table(const SampleManifest& manifest);

struct GoldItem {
  std::string id;
  aligner::ErrorCategory category = aligner::ErrorCategory::NoChange;
  TokenSeq source;
  TokenSeq corrected;

  bool operator==(const GoldItem&) const = default;
};

/// Kept iff subtask 1 is accurate and subtask 2 is no-errors; Undetermined
/// in either subtask excludes.
bool retained(const FinalLabel& label);

/// Throws ValidationError listing every item lacking a final label for
/// either subtask, and LoadError for labels with no matching candidate.
std::vector<GoldItem> retention_filter(const std::vector<FinalLabel>& labels,
                                       const model_bridge::CandidateSet& candidates);

void write_gold(const std::filesystem::path& path, const std::vector<GoldItem>& gold);
std::vector<GoldItem> read_gold(const std::filesystem::path& path);

/// Nine pure categories in corpus-table row order.
const std::vector<aligner::ErrorCategory>& table_row_order();

struct CorpusStats {
  std::map<aligner::ErrorCategory, std::size_t> counts;
  std::size_t total = 0;
};

CorpusStats corpus_stats(const std::vector<GoldItem>& gold);

/// "Type<TAB>Number" table, rows in table_row_order(), then "Sum".
std::string render_stats(const CorpusStats& stats);
std::vector<Json> stats_records(const CorpusStats& stats);

struct SubtaskTallies {
  std::size_t items = 0;
  std::size_t accurate = 0, inaccurate = 0, undetermined_1 = 0;
  std::size_t no_errors = 0, has_errors = 0, undetermined_2 = 0;

  bool operator==(const SubtaskTallies&) const = default;
};

/// Per-category tallies over judged items (judgments > 0). An item with no
/// final label for a subtask is tallied as undetermined for it.
std::map<aligner::ErrorCategory, SubtaskTallies> annotation_report(
    const std::vector<FinalLabel>& labels);

std::string render_annotation_report(
    const std::map<aligner::ErrorCategory, SubtaskTallies>& report);
std::vector<Json> annotation_report_records(
    const std::map<aligner::ErrorCategory, SubtaskTallies>& report);

}  // namespace gecforge::selector
