#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gecforge/ingest.hpp"
#include "gecforge/io.hpp"
#include "gecforge/pairs.hpp"
#include "gecforge/random.hpp"
#include "gecforge/tokens.hpp"

namespace gecforge::corruptor {

struct CorruptionConfig {
  double p_delete = 0.10;
  double p_add = 0.10;
  double p_replace = 0.10;
  double sigma = 0.50;  // in position-key units
  std::uint64_t seed = 0;

  /// Throws ConfigError unless every probability is in [0,1] and sigma >= 0.
  void validate() const;
};

enum class OpKind { Delete, Add, Replace, Shuffle };

std::string to_string(OpKind kind);
OpKind parse_op_kind(const std::string& name);

/// One applied corruption, with `position` relative to the sequence as it
/// was when the op was applied. Add inserts before `position` (which may
/// equal the length). Shuffle maps output[j] = input[permutation[j]].
struct CorruptionOp {
  OpKind kind = OpKind::Delete;
  std::size_t position = 0;
  std::string token;
  std::vector<std::size_t> permutation;

  bool operator==(const CorruptionOp&) const = default;
};

struct CorruptionRecord {
  std::string source_id;
  std::vector<CorruptionOp> ops;
  std::uint64_t item_seed = 0;

  bool operator==(const CorruptionRecord&) const = default;
};

/// Sites examined and ops realized, per pass. Rates are realized/sites.
struct SiteCounts {
  std::size_t delete_sites = 0;
  std::size_t deletions = 0;
  std::size_t add_sites = 0;
  std::size_t additions = 0;
  std::size_t replace_sites = 0;
  std::size_t replacements = 0;
  std::size_t shuffles = 0;  // sentences whose order actually changed

  SiteCounts& operator+=(const SiteCounts& o);
  double delete_rate() const;
  double add_rate() const;
  double replace_rate() const;
};

/// Unigram distribution over the corpus. Types are held in byte order so
/// sampling depends only on the counts, never on insertion order.
class Vocabulary {
 public:
  Vocabulary() = default;
  static Vocabulary from_sentences(const std::vector<ingest::SentenceRecord>& corpus);
  static Vocabulary from_counts(const std::vector<std::pair<std::string, std::uint64_t>>& counts);

  bool empty() const { return total_ == 0; }
  std::size_t types() const { return tokens_.size(); }
  std::uint64_t total() const { return total_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  const std::string& sample(Rng& rng) const;

  /// Draws from the distribution with `excluded` removed; nullopt when
  /// nothing else remains.
  std::optional<std::string> sample_excluding(Rng& rng, const std::string& excluded) const;

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> cumulative_;  // inclusive prefix sums
  std::uint64_t total_ = 0;
};

struct CorruptionResult {
  TokenSeq corrupted;
  CorruptionRecord record;
  SiteCounts sites;
};

/// Applies the four passes in fixed order with every random draw taken from
/// Rng(item_seed) in this schedule:
///   1. deletion: one uniform per original token, delete if < p_delete;
///   2. addition: one uniform per gap of the post-deletion sequence (length
///      m gives m+1 gaps); on success one unigram draw, inserted at the gap;
///   3. replacement: one uniform per surviving original token; on success
///      one unigram draw excluding the current token;
///   4. position deviation: when sigma > 0 and length >= 2, one normal per
///      token, key_i = i + sigma * z_i, stable sort by key.
/// Throws InputError for an empty sentence and ConfigError when an add or
/// replace pass is active but the vocabulary is empty.
CorruptionResult corrupt(const TokenSeq& sentence, const CorruptionConfig& config,
                         std::uint64_t item_seed, const Vocabulary& vocabulary);

struct Shuffled {
  TokenSeq tokens;
  std::vector<std::size_t> permutation;
};

Shuffled shuffle_positions(const TokenSeq& tokens, double sigma, Rng& rng);

/// Applies ops in order; throws ConsistencyError on an out-of-bounds op.
TokenSeq replay(const TokenSeq& original, const std::vector<CorruptionOp>& ops);

std::uint64_t item_seed_for(std::uint64_t seed, const std::string& sentence_id);

struct CorpusCorruption {
  std::vector<SentencePair> pairs;        // source=corrupted, target=original
  std::vector<CorruptionRecord> records;  // one per emitted pair, same order
  std::size_t dropped_identical = 0;
  std::size_t dropped_empty = 0;
  SiteCounts sites;  // over every sentence, emitted or dropped
};

/// The vocabulary is built from the corpus itself when not supplied.
CorpusCorruption corrupt_corpus(const std::vector<ingest::SentenceRecord>& corpus,
                                const CorruptionConfig& config, std::size_t workers = 1,
                                const Vocabulary* vocabulary = nullptr);

Json to_json(const CorruptionRecord& record);
CorruptionRecord record_from_json(const Json& j);

void write_record_log(const std::filesystem::path& path,
                      const std::vector<CorruptionRecord>& records);
std::vector<CorruptionRecord> read_record_log(const std::filesystem::path& path);

/// Which of the four operations can realize each common error type.
struct ErrorTypeOperations {
  std::string error_type;
  bool deletion, addition, replacement, position_deviation;
};

const std::vector<ErrorTypeOperations>& error_type_operation_table();

/// Human-readable corruption summary: config, per-pass rates, drop counts
/// and the error-type/operation table.
std::string render_report(const CorruptionConfig& config, const CorpusCorruption& result);

}  // namespace gecforge::corruptor
