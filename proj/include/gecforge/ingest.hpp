#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gecforge/tokens.hpp"

namespace gecforge::ingest {

struct SentenceRecord {
  std::string id;
  std::string doc_id;
  std::size_t index_in_doc = 0;
  TokenSeq tokens;
  std::string raw;

  bool operator==(const SentenceRecord&) const = default;
};

struct CorpusSplit {
  std::vector<SentenceRecord> train;
  std::vector<SentenceRecord> validation;
  std::vector<SentenceRecord> test;
  std::uint64_t seed = 0;
};

using LengthHistogram = std::map<std::size_t, std::size_t>;

/// Sentence-final abbreviations that must not end a sentence ("No.",
/// "dll."). Matching is case-insensitive on the whole word.
class AbbreviationList {
 public:
  AbbreviationList() = default;
  explicit AbbreviationList(const std::vector<std::string>& entries);

  /// Small built-in Indonesian set.
  static AbbreviationList indonesian_default();

  /// One entry per line; blank lines and '#' comments ignored.
  static AbbreviationList load(const std::filesystem::path& path);

  void add(std::string_view entry);
  bool contains(std::string_view word) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::set<std::string> entries_;
};

struct Document {
  std::string doc_id;
  std::string text;
};

std::vector<std::string> segment_sentences(std::string_view document_text,
                                           const AbbreviationList& abbreviations);

/// Whitespace split, then punctuation peeled off both ends of each chunk
/// as separate tokens. A chunk listed in `abbreviations` keeps its period.
TokenSeq tokenize(std::string_view sentence,
                  const AbbreviationList* abbreviations = nullptr);

inline constexpr std::size_t kMinSentenceTokens = 10;
inline constexpr std::size_t kMaxSentenceTokens = 50;

std::vector<SentenceRecord> filter_by_length(
    const std::vector<SentenceRecord>& sentences,
    std::size_t min_len = kMinSentenceTokens,
    std::size_t max_len = kMaxSentenceTokens);

inline constexpr std::size_t kDefaultValidationSize = 100000;
inline constexpr std::size_t kDefaultTestSize = 100000;

/// Seeded uniform partition. Input order does not matter: sentences are
/// first put in (doc_id, index_in_doc) order, and each part keeps that order.
CorpusSplit split_corpus(const std::vector<SentenceRecord>& sentences,
                         std::size_t n_validation, std::size_t n_test,
                         std::uint64_t seed);

LengthHistogram length_histogram(const std::vector<SentenceRecord>& sentences);

void sort_canonical(std::vector<SentenceRecord>& sentences);

std::string sentence_id(std::string_view doc_id, std::size_t index_in_doc);

struct IngestOptions {
  std::size_t min_len = kMinSentenceTokens;
  std::size_t max_len = kMaxSentenceTokens;
  AbbreviationList abbreviations = AbbreviationList::indonesian_default();
  bool drop_exact_duplicates = false;
  std::size_t workers = 1;
};

struct IngestResult {
  std::vector<SentenceRecord> sentences;  // retained, canonical order
  std::size_t documents = 0;
  std::size_t segmented = 0;
  std::size_t dropped_length = 0;
  std::size_t dropped_duplicates = 0;
};

/// segment -> tokenize -> length filter (-> optional exact-duplicate drop).
IngestResult ingest_documents(const std::vector<Document>& documents,
                              const IngestOptions& options);

/// One document per file; doc_id is the file stem and must be unique.
std::vector<Document> read_documents(
    const std::vector<std::filesystem::path>& paths);

/// Manifest mode: one document per non-empty line; doc_id "<stem>:<line>".
std::vector<Document> read_manifest(const std::filesystem::path& path);

/// corpus file: one sentence per line, tokens joined by single spaces.
/// sidecar: one JSON record per line with id, doc_id, index, raw.
void write_corpus(const std::filesystem::path& corpus_path,
                  const std::filesystem::path& meta_path,
                  const std::vector<SentenceRecord>& sentences);

std::vector<SentenceRecord> read_corpus(const std::filesystem::path& corpus_path,
                                        const std::filesystem::path& meta_path);

std::string render_histogram(const LengthHistogram& histogram);

/// One {"id","part"} record per sentence, parts "train"/"validation"/"test".
void write_split(const std::filesystem::path& path, const CorpusSplit& split);

std::map<std::string, std::string> read_split(const std::filesystem::path& path);

}  // namespace gecforge::ingest
