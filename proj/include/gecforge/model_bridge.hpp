#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gecforge/aligner.hpp"
#include "gecforge/corruptor.hpp"
#include "gecforge/ingest.hpp"
#include "gecforge/pairs.hpp"

namespace gecforge::model_bridge {

/// Hyperparameters of the Transformer GEC model trained externally on the
/// synthetic pairs. Defaults are the published training setup.
struct TrainingManifest {
  int epochs = 50;
  int batch_size = 64;
  int max_tokens_per_batch = 4096;
  std::string lr_schedule = "triangular";
  double max_lr = 0.004;
  double grad_clip = 2;
  int embed_dim = 512;
  int encoder_blocks = 6;
  int decoder_blocks = 6;
  int attention_heads = 8;
  int ffn_dim = 4096;
  std::string activation_fn = "relu";
  double dropout = 0.2;
  double activation_dropout = 0.2;
  double attention_dropout = 0.2;
  int max_positions = 1024;
  bool shared_embeddings = true;
  int beam_size = 5;
  std::string selection_metric = "F_0.5";

  bool operator==(const TrainingManifest&) const = default;
};

/// Keys in emission order.
const std::vector<std::string>& manifest_keys();

/// Throws ConfigError for an unknown key or an unparseable value.
void set_manifest_value(TrainingManifest& manifest, const std::string& key,
                        const std::string& value);

TrainingManifest make_manifest(const std::map<std::string, std::string>& overrides);

/// Flat "key = value" text, one key per line, in manifest_keys() order.
std::string emit_manifest(const TrainingManifest& manifest);

/// Accepts '#' comments and blank lines; every key must be known and present.
TrainingManifest parse_manifest(const std::string& text);

/// Writes "<prefix>.src"/"<prefix>.tgt" or "<prefix>.tsv".
void export_training_pairs(const std::vector<SentencePair>& pairs, PairLayout layout,
                           const std::filesystem::path& prefix);

struct Prediction {
  std::string id;
  TokenSeq source;
  TokenSeq hypothesis;

  bool operator==(const Prediction&) const = default;
};

struct PredictionSet {
  std::vector<Prediction> pairs;
  std::string model_tag;
  std::size_t dropped_empty = 0;
  std::vector<std::string> warnings;
};

/// Line i of the source file pairs with line i of the hypothesis file. Ids
/// are 1-based line numbers unless an id file (one id per line) is given.
/// Empty lines are dropped with a warning and counted.
PredictionSet import_predictions(const std::filesystem::path& source_file,
                                 const std::filesystem::path& hypothesis_file,
                                 const std::string& model_tag,
                                 const std::optional<std::filesystem::path>& id_file = {});

/// Perfect-model test double: replays each record over its original
/// sentence to obtain the corrupted source and emits the original as the
/// hypothesis. Throws LoadError for a record whose source id is unknown.
PredictionSet replay_corrector(const std::vector<corruptor::CorruptionRecord>& records,
                               const std::vector<ingest::SentenceRecord>& originals);

void write_predictions(const std::filesystem::path& path, const PredictionSet& predictions);
PredictionSet read_predictions(const std::filesystem::path& path);

struct Candidate {
  std::string id;
  TokenSeq source;
  TokenSeq hypothesis;
  aligner::ErrorCategory category = aligner::ErrorCategory::NoChange;
  aligner::Alignment alignment;
};

struct CandidateSet {
  std::vector<Candidate> pairs;
  std::map<aligner::ErrorCategory, std::size_t> category_counts;
  std::size_t duplicate_pairs = 0;  // repeats of an earlier (source, hypothesis)
};

CandidateSet extract_candidates(const PredictionSet& predictions, std::size_t workers = 1);

Json to_json(const Candidate& candidate);
Candidate candidate_from_json(const Json& j);

void write_candidates(const std::filesystem::path& path, const CandidateSet& candidates);
CandidateSet read_candidates(const std::filesystem::path& path);

/// Per-pair rows "id<TAB>category<TAB>distance<TAB>ops" followed by a
/// "# category<TAB>count" summary block over all twelve categories.
std::string render_classification(const CandidateSet& candidates);

}  // namespace gecforge::model_bridge
