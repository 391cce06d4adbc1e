#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "gecforge/aligner.hpp"
#include "gecforge/labels.hpp"
#include "gecforge/model_bridge.hpp"
#include "gecforge/selector.hpp"

namespace gecforge::annotation {

enum class ItemStatus { Pending, InProgress, Done };

std::string to_string(ItemStatus status);

struct AnnotationItem {
  std::string item_id;
  TokenSeq source;
  TokenSeq corrected;
  aligner::ErrorCategory category = aligner::ErrorCategory::NoChange;
  aligner::Alignment alignment;
  std::vector<aligner::DiffSpan> diff;
  ItemStatus status = ItemStatus::Pending;
};

struct Judgment {
  std::string item_id;
  std::string annotator_id;
  CorrectionLabel subtask1 = CorrectionLabel::Undetermined;
  ResidualLabel subtask2 = ResidualLabel::Undetermined;
  std::string timestamp;  // ISO-8601 UTC

  bool operator==(const Judgment&) const = default;
};

Json to_json(const Judgment& j);
Judgment judgment_from_json(const Json& j);

enum class PolicyMode { Single, Majority, Unanimous };

std::string to_string(PolicyMode mode);
PolicyMode parse_policy_mode(const std::string& name);

struct AdjudicationPolicy {
  PolicyMode mode = PolicyMode::Single;
  std::size_t annotators_per_item = 1;

  /// Single needs exactly 1, Majority an odd count, all at least 1.
  void validate() const;
};

/// One Pending item per sampled id, sorted by item_id, with the diff
/// precomputed. Throws LoadError listing ids missing from the candidates.
std::vector<AnnotationItem> load_tasks(const selector::SampleManifest& manifest,
                                       const model_bridge::CandidateSet& candidates);

/// Final labels of one item from its judgment multiset. Majority: a value
/// with more than half the votes, else Undetermined. Unanimous: the shared
/// value, else Undetermined. Single: the sole judgment (several judgments
/// are treated as Unanimous). Order of `judgments` does not matter.
FinalLabel adjudicate(const std::string& item_id, aligner::ErrorCategory category,
                      const std::vector<Judgment>& judgments, const AdjudicationPolicy& policy);

/// Throws ValidationError listing every underpopulated item unless
/// `skip_underpopulated`, in which case those items are left out.
std::vector<FinalLabel> finalize_labels(const std::vector<AnnotationItem>& items,
                                        const std::vector<Judgment>& judgments,
                                        const AdjudicationPolicy& policy,
                                        bool skip_underpopulated = false);

/// Append-only line-delimited judgment log. Each append reaches stable
/// storage (fsync) before it returns. On open, a torn trailing line left by
/// a crash is cut off; every complete line must parse.
class JudgmentLog {
 public:
  explicit JudgmentLog(std::filesystem::path path);
  ~JudgmentLog();
  JudgmentLog(const JudgmentLog&) = delete;
  JudgmentLog& operator=(const JudgmentLog&) = delete;

  const std::vector<Judgment>& replayed() const { return replayed_; }
  bool truncated_tail() const { return truncated_tail_; }
  void append(const Judgment& judgment);
  std::string contents() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::vector<Judgment> replayed_;
  bool truncated_tail_ = false;
};

struct Acknowledgment {
  std::size_t sequence = 0;  // 1-based position in the log
  ItemStatus status = ItemStatus::Pending;
};

struct Progress {
  std::size_t total = 0;
  std::size_t pending = 0;
  std::size_t in_progress = 0;
  std::size_t done = 0;
  std::size_t judgments = 0;
  std::map<std::string, std::size_t> per_annotator;
};

Json to_json(const Progress& progress);
Json to_json(const AnnotationItem& item, std::size_t judgments);

/// Task queue + judgment store. State is the replay of the log; all
/// mutations go through one writer lock and are acknowledged only after the
/// log append is durable.
class AnnotationStore {
 public:
  using Clock = std::chrono::steady_clock;

  AnnotationStore(std::vector<AnnotationItem> items, std::set<std::string> annotators,
                  AdjudicationPolicy policy, const std::filesystem::path& log_path,
                  std::chrono::seconds lease_ttl = std::chrono::minutes(30));

  /// An item this annotator has not judged, fewest judgments first, ties by
  /// item_id. Hands out at most annotators_per_item concurrent assignments
  /// (judgments plus live leases) per item. Repeated calls return the
  /// annotator's current unfinished assignment. Throws AuthError for an
  /// unregistered annotator.
  std::optional<AnnotationItem> next_item(const std::string& annotator_id);

  /// Throws AuthError, NotFoundError, or ConflictError (already judged).
  Acknowledgment submit_judgment(Judgment judgment);

  std::optional<AnnotationItem> item(const std::string& item_id) const;
  std::size_t judgment_count(const std::string& item_id) const;
  Progress progress() const;
  std::string export_log() const;
  std::vector<Judgment> judgments() const;
  std::vector<FinalLabel> finalize(bool skip_underpopulated = false) const;
  const AdjudicationPolicy& policy() const { return policy_; }
  std::size_t replayed_count() const { return replayed_count_; }

 private:
  struct Lease {
    std::string item_id;
    Clock::time_point expires;
  };

  std::size_t required() const;
  ItemStatus status_of(std::size_t index) const;
  std::size_t live_leases_excluding(const std::string& item_id, const std::string& annotator,
                                    Clock::time_point now) const;
  void apply(const Judgment& judgment);

  mutable std::shared_mutex mutex_;
  std::vector<AnnotationItem> items_;
  std::map<std::string, std::size_t> index_;
  std::set<std::string> annotators_;
  AdjudicationPolicy policy_;
  JudgmentLog log_;
  std::chrono::seconds lease_ttl_;
  std::vector<Judgment> judgments_;
  std::vector<std::set<std::string>> judged_by_;
  std::map<std::string, Lease> leases_;
  std::size_t replayed_count_ = 0;
};

std::string utc_timestamp();

}  // namespace gecforge::annotation
