#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gecforge/aligner.hpp"
#include "gecforge/error.hpp"
#include "gecforge/labels.hpp"
#include "gecforge/model_bridge.hpp"

namespace gecforge::judge {

// ---------------------------------------------------------------- eval set

/// gold_subtask1: the correction is accurate.
/// gold_subtask2: the corrected sentence still has errors.
struct EvalItem {
  std::string id;
  aligner::ErrorCategory category = aligner::ErrorCategory::NoChange;
  TokenSeq source;
  TokenSeq corrected;
  bool gold_subtask1 = false;
  bool gold_subtask2 = false;

  bool operator==(const EvalItem&) const = default;
};

struct EvalSet {
  std::vector<EvalItem> items;
  std::string language;
};

struct EvalSetReport {
  std::size_t sampled = 0;
  std::size_t excluded_undetermined = 0;
  std::map<aligner::ErrorCategory, std::size_t> shortfall;
  std::size_t subtask1_true = 0, subtask1_false = 0;
  std::size_t subtask2_true = 0, subtask2_false = 0;
};

inline constexpr std::size_t kDefaultEvalPerType = 100;

/// Seeded uniform sample of n_per_type judged items per pure category, then
/// removal of items Undetermined (or unlabeled) in either subtask, which
/// are counted in the report. Short categories are taken whole.
std::pair<EvalSet, EvalSetReport> build_eval_set(const std::vector<FinalLabel>& labels,
                                                 const model_bridge::CandidateSet& candidates,
                                                 std::size_t n_per_type, std::uint64_t seed,
                                                 const std::string& language);

/// Rows "subtask N<TAB>False|True<TAB>count" under a "Task<TAB>Label<TAB>lang" header.
std::string render_label_distribution(const EvalSetReport& report, const std::string& language);

void write_eval_set(const std::filesystem::path& path, const EvalSet& set);
EvalSet read_eval_set(const std::filesystem::path& path);

// ---------------------------------------------------------------- prompts

inline constexpr std::string_view kLanguagePlaceholder = "{language}";
inline constexpr std::string_view kSentence1Placeholder = "{sentence 1}";
inline constexpr std::string_view kSentence2Placeholder = "{sentence 2}";

struct PromptTemplate {
  std::string name;
  std::string body;
  int subtask = 1;
  std::string template_language = "English";

  /// Every placeholder at most once; {sentence 2} always required and
  /// {sentence 1} required for subtask 1. Throws TemplateError.
  void validate() const;
};

/// Display name for a language tag ("id" -> "Indonesian"); unknown tags
/// are returned unchanged.
std::string language_name(const std::string& tag);

std::string render_prompt(const PromptTemplate& tmpl, const std::string& language_tag,
                          const TokenSeq& sentence1, const TokenSeq& sentence2, int subtask);

/// Built-in templates following the closed-endpoint (English and
/// Indonesian) and open-endpoint layouts. Wording is ours, not a
/// transcription.
const std::vector<PromptTemplate>& builtin_templates();
const PromptTemplate& builtin_template(const std::string& name);

PromptTemplate load_template(const std::filesystem::path& path, int subtask,
                             const std::string& template_language);

// ---------------------------------------------------------------- verdicts

enum class Verdict { True, False, Unparseable };

std::string to_string(Verdict v);

struct Lexicon {
  std::vector<std::string> affirmations = {"yes", "correct", "accurate"};
  std::vector<std::string> negations = {"no", "incorrect", "inaccurate"};
};

/// Case-insensitive whole-word scan; the first keyword in reading order
/// decides. No keyword, or a first keyword present in both lists, gives
/// Unparseable. Entries may be multi-word phrases.
Verdict parse_verdict(const std::string& raw_text, int subtask,
                      const Lexicon& lexicon = Lexicon{});

// ---------------------------------------------------------------- metrics

double precision(std::size_t tp, std::size_t fp);
double recall(std::size_t tp, std::size_t fn);
double f_beta(double precision, double recall, double beta = 1.0);

struct Metrics {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t unparseable = 0;
  double precision = 0, recall = 0, f_beta = 0;
  double beta = 1;
};

/// Unparseable predictions are excluded from the confusion counts and
/// tallied. Throws AlignmentError on a length mismatch.
Metrics evaluate(const std::vector<bool>& golds, const std::vector<Verdict>& predictions,
                 bool positive_class = true, double beta = 1.0);

// ---------------------------------------------------------------- endpoints

struct DecodingParams {
  double temperature = 1;
  double presence_penalty = 0;
  double frequency_penalty = 0;
  int beams = 4;  // sent only to open endpoints
};

Json to_json(const DecodingParams& d);

enum class EndpointMode { Closed, Open };

struct EndpointConfig {
  std::string name = "default";
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string path = "/chat/completions";
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  double timeout_seconds = 60;
  std::size_t max_concurrency = 1;
  double requests_per_minute = 0;  // 0 = unlimited
  EndpointMode mode = EndpointMode::Closed;
  int max_retries = 3;
  std::chrono::milliseconds backoff_initial{500};
  DecodingParams decoding;
};

/// Flat key=value file. The API key itself is never read from config.
EndpointConfig load_endpoint_config(const std::filesystem::path& path);
EndpointConfig parse_endpoint_config(const std::string& text, const std::string& origin);

/// Chat-completion request body with the decoding parameters.
Json build_request(const EndpointConfig& config, const std::string& prompt);

struct QueryContext {
  std::string item_id;
  int subtask = 1;
  std::string template_language;
};

/// Outcome of one judge query: response text, or a typed transport failure.
struct JudgeReply {
  std::optional<std::string> text;
  std::optional<ErrorKind> error;
  std::string error_message;
  int attempts = 0;
  int http_status = 0;
  Json request;
};

class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::string name() const = 0;
  virtual std::string model() const = 0;
  virtual std::size_t max_concurrency() const { return 1; }
  virtual JudgeReply query(const std::string& prompt, const QueryContext& context) = 0;
};

/// Single blocking request with retries on 429/5xx/connection failures
/// (exponential backoff, at most max_retries). Throws AuthError,
/// RateLimitError, TimeoutError or TransportError.
std::string query_judge(const EndpointConfig& config, const std::string& prompt,
                        int* attempts_out = nullptr, int* status_out = nullptr);

class ChatCompletionJudge : public Judge {
 public:
  explicit ChatCompletionJudge(EndpointConfig config);
  std::string name() const override { return config_.name; }
  std::string model() const override { return config_.model; }
  std::size_t max_concurrency() const override { return config_.max_concurrency; }
  JudgeReply query(const std::string& prompt, const QueryContext& context) override;

 private:
  void throttle();

  EndpointConfig config_;
  std::mutex throttle_mutex_;
  std::chrono::steady_clock::time_point next_slot_{};
};

/// Test double answering through a callback.
class ScriptedJudge : public Judge {
 public:
  using Script = std::function<std::string(const std::string& prompt, const QueryContext&)>;
  ScriptedJudge(std::string name, std::string model, Script script);
  std::string name() const override { return name_; }
  std::string model() const override { return model_; }
  JudgeReply query(const std::string& prompt, const QueryContext& context) override;
  std::size_t calls() const { return calls_; }

 private:
  std::string name_, model_;
  Script script_;
  std::mutex mutex_;
  std::size_t calls_ = 0;
};

/// Answers from a previous run log, without network access.
class ReplayJudge : public Judge {
 public:
  ReplayJudge(std::string name, std::string model, const std::vector<Json>& run_log);
  std::string name() const override { return name_; }
  std::string model() const override { return model_; }
  JudgeReply query(const std::string& prompt, const QueryContext& context) override;

 private:
  std::string name_, model_;
  std::map<std::string, Json> entries_;
};

/// Distinct (endpoint, model) pairs recorded in a run log.
std::vector<std::pair<std::string, std::string>> run_log_endpoints(const std::vector<Json>& log);

// ---------------------------------------------------------------- benchmark

/// Single-writer append-only run log (one JSON record per query).
class RunLog {
 public:
  explicit RunLog(std::filesystem::path path);
  void append(const std::vector<Json>& records);

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

struct BenchmarkRow {
  std::string language;
  std::string endpoint;
  std::string model;
  std::string template_language;
  int subtask = 1;
  Metrics metrics;
  std::size_t transport_failures = 0;
  std::size_t items = 0;
};

struct BenchmarkOptions {
  Lexicon lexicon;
  double beta = 1.0;
};

/// For every judge x template: one query per item, verdicts, metrics. A
/// failed query counts as Unparseable and never aborts the run. Log records
/// are written in item order after each (judge, template) batch.
std::vector<BenchmarkRow> run_benchmark(const EvalSet& eval_set,
                                        const std::vector<PromptTemplate>& templates,
                                        const std::vector<Judge*>& judges, RunLog* run_log,
                                        const BenchmarkOptions& options = {});

/// Per-subtask tables "Language Model P R F" plus count columns.
std::string render_benchmark(const std::vector<BenchmarkRow>& rows);
std::vector<Json> benchmark_records(const std::vector<BenchmarkRow>& rows);

}  // namespace gecforge::judge
