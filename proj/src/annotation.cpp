#include "gecforge/annotation.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <ctime>

#include "gecforge/error.hpp"
#include "gecforge/io.hpp"

namespace gecforge::annotation {

namespace fs = std::filesystem;

std::string to_string(ItemStatus status) {
  switch (status) {
    case ItemStatus::Pending: return "pending";
    case ItemStatus::InProgress: return "in_progress";
    case ItemStatus::Done: return "done";
  }
  return "?";
}

std::string to_string(PolicyMode mode) {
  switch (mode) {
    case PolicyMode::Single: return "single";
    case PolicyMode::Majority: return "majority";
    case PolicyMode::Unanimous: return "unanimous";
  }
  return "?";
}

PolicyMode parse_policy_mode(const std::string& name) {
  if (name == "single") return PolicyMode::Single;
  if (name == "majority") return PolicyMode::Majority;
  if (name == "unanimous") return PolicyMode::Unanimous;
  throw ConfigError("unknown adjudication policy '" + name +
                    "' (expected single, majority or unanimous)");
}

void AdjudicationPolicy::validate() const {
  if (annotators_per_item < 1) throw ConfigError("annotators_per_item must be at least 1");
  if (mode == PolicyMode::Single && annotators_per_item != 1)
    throw ConfigError("single policy uses exactly one annotator per item");
  if (mode == PolicyMode::Majority && annotators_per_item % 2 == 0)
    throw ConfigError("majority policy requires an odd annotators_per_item, got " +
                      std::to_string(annotators_per_item));
}

Json to_json(const Judgment& j) {
  return {{"item_id", j.item_id},
          {"annotator_id", j.annotator_id},
          {"subtask1", to_string(j.subtask1)},
          {"subtask2", to_string(j.subtask2)},
          {"timestamp", j.timestamp}};
}

Judgment judgment_from_json(const Json& j) {
  Judgment out;
  try {
    out.item_id = j.at("item_id").get<std::string>();
    out.annotator_id = j.at("annotator_id").get<std::string>();
    out.subtask1 = parse_correction_label(j.at("subtask1").get<std::string>());
    out.subtask2 = parse_residual_label(j.at("subtask2").get<std::string>());
    out.timestamp = j.value("timestamp", std::string{});
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed judgment: ") + e.what());
  }
  return out;
}

std::vector<AnnotationItem> load_tasks(const selector::SampleManifest& manifest,
                                       const model_bridge::CandidateSet& candidates) {
  std::map<std::string, const model_bridge::Candidate*> by_id;
  for (const auto& c : candidates.pairs) by_id[c.id] = &c;
  std::vector<AnnotationItem> items;
  std::vector<std::string> missing;
  for (const auto& id : manifest.all_ids()) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      missing.push_back(id);
      continue;
    }
    const auto& c = *it->second;
    AnnotationItem item;
    item.item_id = id;
    item.source = c.source;
    item.corrected = c.hypothesis;
    item.category = c.category;
    item.alignment = c.alignment;
    item.diff = aligner::render_diff(c.alignment, c.source, c.hypothesis);
    items.push_back(std::move(item));
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw LoadError("sample manifest ids not found among candidates: " + list);
  }
  std::sort(items.begin(), items.end(),
            [](const AnnotationItem& a, const AnnotationItem& b) { return a.item_id < b.item_id; });
  return items;
}

namespace {

template <typename Label>
Label vote(const std::vector<Label>& votes, PolicyMode mode, Label undetermined) {
  std::map<Label, std::size_t> counts;
  for (auto v : votes) ++counts[v];
  if (mode == PolicyMode::Majority) {
    for (const auto& [label, n] : counts)
      if (2 * n > votes.size()) return label;
    return undetermined;
  }
  // Unanimous, and Single with more than one judgment.
  return counts.size() == 1 ? counts.begin()->first : undetermined;
}

}  // namespace

FinalLabel adjudicate(const std::string& item_id, aligner::ErrorCategory category,
                      const std::vector<Judgment>& judgments, const AdjudicationPolicy& policy) {
  FinalLabel out;
  out.item_id = item_id;
  out.category = category;
  out.judgments = judgments.size();
  if (judgments.empty()) return out;
  std::vector<CorrectionLabel> s1;
  std::vector<ResidualLabel> s2;
  for (const auto& j : judgments) {
    s1.push_back(j.subtask1);
    s2.push_back(j.subtask2);
  }
  out.subtask1 = vote(s1, policy.mode, CorrectionLabel::Undetermined);
  out.subtask2 = vote(s2, policy.mode, ResidualLabel::Undetermined);
  return out;
}

std::vector<FinalLabel> finalize_labels(const std::vector<AnnotationItem>& items,
                                        const std::vector<Judgment>& judgments,
                                        const AdjudicationPolicy& policy,
                                        bool skip_underpopulated) {
  policy.validate();
  std::map<std::string, std::vector<Judgment>> by_item;
  for (const auto& j : judgments) by_item[j.item_id].push_back(j);
  std::vector<FinalLabel> out;
  std::vector<std::string> under;
  for (const auto& item : items) {
    const auto& js = by_item[item.item_id];
    if (js.size() < policy.annotators_per_item) {
      under.push_back(item.item_id + " (" + std::to_string(js.size()) + "/" +
                      std::to_string(policy.annotators_per_item) + ")");
      continue;
    }
    out.push_back(adjudicate(item.item_id, item.category, js, policy));
  }
  if (!under.empty() && !skip_underpopulated) {
    std::string list;
    for (const auto& id : under) list += (list.empty() ? "" : ", ") + id;
    throw ValidationError("items with too few judgments to finalize: " + list);
  }
  return out;
}

// ---------------------------------------------------------------------------

JudgmentLog::JudgmentLog(fs::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw IoError(path_.string(), std::strerror(errno));

  std::string content = read_file(path_);
  std::size_t good = content.rfind('\n');
  good = good == std::string::npos ? 0 : good + 1;
  if (good != content.size()) {
    if (::ftruncate(fd_, static_cast<off_t>(good)) != 0)
      throw IoError(path_.string(), std::string("truncate failed: ") + std::strerror(errno));
    ::fsync(fd_);
    truncated_tail_ = true;
    content.resize(good);
  }
  std::size_t start = 0, lineno = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    std::string line = content.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (line.empty()) continue;
    try {
      replayed_.push_back(judgment_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      throw FormatError(path_.string() + ":" + std::to_string(lineno) +
                        ": corrupt judgment record: " + e.what());
    }
  }
}

JudgmentLog::~JudgmentLog() {
  if (fd_ >= 0) ::close(fd_);
}

void JudgmentLog::append(const Judgment& judgment) {
  std::string line = to_json(judgment).dump() + "\n";
  const char* p = line.data();
  std::size_t left = line.size();
  while (left > 0) {
    ssize_t w = ::write(fd_, p, left);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw IoError(path_.string(), std::string("append failed: ") + std::strerror(errno));
    }
    p += w;
    left -= static_cast<std::size_t>(w);
  }
  if (::fsync(fd_) != 0)
    throw IoError(path_.string(), std::string("fsync failed: ") + std::strerror(errno));
}

std::string JudgmentLog::contents() const { return read_file(path_); }

// ---------------------------------------------------------------------------

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()) % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms.count()));
  return out;
}

AnnotationStore::AnnotationStore(std::vector<AnnotationItem> items,
                                 std::set<std::string> annotators, AdjudicationPolicy policy,
                                 const fs::path& log_path, std::chrono::seconds lease_ttl)
    : items_(std::move(items)),
      annotators_(std::move(annotators)),
      policy_(policy),
      log_(log_path),
      lease_ttl_(lease_ttl) {
  policy_.validate();
  std::sort(items_.begin(), items_.end(),
            [](const AnnotationItem& a, const AnnotationItem& b) { return a.item_id < b.item_id; });
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!index_.emplace(items_[i].item_id, i).second)
      throw LoadError("duplicate annotation item id '" + items_[i].item_id + "'");
  }
  judged_by_.resize(items_.size());
  for (const auto& j : log_.replayed()) {
    auto it = index_.find(j.item_id);
    if (it == index_.end())
      throw LoadError(log_path.string() + ": judgment for unknown item '" + j.item_id + "'");
    if (judged_by_[it->second].count(j.annotator_id))
      throw ConsistencyError(log_path.string() + ": annotator '" + j.annotator_id +
                             "' judged item '" + j.item_id + "' twice");
    apply(j);
  }
  replayed_count_ = judgments_.size();
}

std::size_t AnnotationStore::required() const { return policy_.annotators_per_item; }

void AnnotationStore::apply(const Judgment& j) {
  const std::size_t idx = index_.at(j.item_id);
  judged_by_[idx].insert(j.annotator_id);
  judgments_.push_back(j);
  items_[idx].status = status_of(idx);
}

ItemStatus AnnotationStore::status_of(std::size_t idx) const {
  const std::size_t n = judged_by_[idx].size();
  if (n >= required()) return ItemStatus::Done;
  if (n > 0) return ItemStatus::InProgress;
  const auto now = Clock::now();
  for (const auto& [who, lease] : leases_)
    if (lease.item_id == items_[idx].item_id && lease.expires > now) return ItemStatus::InProgress;
  return ItemStatus::Pending;
}

std::size_t AnnotationStore::live_leases_excluding(const std::string& item_id,
                                                   const std::string& annotator,
                                                   Clock::time_point now) const {
  std::size_t n = 0;
  for (const auto& [who, lease] : leases_) {
    if (who == annotator || lease.item_id != item_id || lease.expires <= now) continue;
    const std::size_t idx = index_.at(item_id);
    if (!judged_by_[idx].count(who)) ++n;
  }
  return n;
}

std::optional<AnnotationItem> AnnotationStore::next_item(const std::string& annotator_id) {
  std::unique_lock lock(mutex_);
  if (!annotators_.count(annotator_id))
    throw AuthError("unknown annotator '" + annotator_id + "'");
  const auto now = Clock::now();

  auto held = leases_.find(annotator_id);
  if (held != leases_.end()) {
    const std::size_t idx = index_.at(held->second.item_id);
    if (held->second.expires > now && !judged_by_[idx].count(annotator_id)) {
      held->second.expires = now + lease_ttl_;
      auto out = items_[idx];
      out.status = status_of(idx);
      return out;
    }
    leases_.erase(held);
  }

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (judged_by_[i].count(annotator_id)) continue;
    const std::size_t n = judged_by_[i].size();
    if (n + live_leases_excluding(items_[i].item_id, annotator_id, now) >= required()) continue;
    // items_ is sorted by id, so the first minimum wins ties.
    if (!best || n < judged_by_[*best].size()) best = i;
  }
  if (!best) return std::nullopt;
  leases_[annotator_id] = {items_[*best].item_id, now + lease_ttl_};
  items_[*best].status = status_of(*best);
  return items_[*best];
}

Acknowledgment AnnotationStore::submit_judgment(Judgment judgment) {
  std::unique_lock lock(mutex_);
  if (!annotators_.count(judgment.annotator_id))
    throw AuthError("unknown annotator '" + judgment.annotator_id + "'");
  auto it = index_.find(judgment.item_id);
  if (it == index_.end()) throw NotFoundError("no annotation item '" + judgment.item_id + "'");
  const std::size_t idx = it->second;
  if (judged_by_[idx].count(judgment.annotator_id))
    throw ConflictError("annotator '" + judgment.annotator_id + "' already judged item '" +
                        judgment.item_id + "'");
  if (judgment.timestamp.empty()) judgment.timestamp = utc_timestamp();

  log_.append(judgment);  // durable before any state changes or the ack
  auto lease = leases_.find(judgment.annotator_id);
  if (lease != leases_.end() && lease->second.item_id == judgment.item_id) leases_.erase(lease);
  apply(judgment);
  return {judgments_.size(), items_[idx].status};
}

std::optional<AnnotationItem> AnnotationStore::item(const std::string& item_id) const {
  std::shared_lock lock(mutex_);
  auto it = index_.find(item_id);
  if (it == index_.end()) return std::nullopt;
  auto out = items_[it->second];
  out.status = status_of(it->second);
  return out;
}

std::size_t AnnotationStore::judgment_count(const std::string& item_id) const {
  std::shared_lock lock(mutex_);
  auto it = index_.find(item_id);
  return it == index_.end() ? 0 : judged_by_[it->second].size();
}

Progress AnnotationStore::progress() const {
  std::shared_lock lock(mutex_);
  Progress p;
  p.total = items_.size();
  for (std::size_t i = 0; i < items_.size(); ++i) {
    switch (status_of(i)) {
      case ItemStatus::Pending: ++p.pending; break;
      case ItemStatus::InProgress: ++p.in_progress; break;
      case ItemStatus::Done: ++p.done; break;
    }
  }
  p.judgments = judgments_.size();
  for (const auto& j : judgments_) ++p.per_annotator[j.annotator_id];
  return p;
}

std::string AnnotationStore::export_log() const {
  std::shared_lock lock(mutex_);
  return log_.contents();
}

std::vector<Judgment> AnnotationStore::judgments() const {
  std::shared_lock lock(mutex_);
  return judgments_;
}

std::vector<FinalLabel> AnnotationStore::finalize(bool skip_underpopulated) const {
  std::shared_lock lock(mutex_);
  return finalize_labels(items_, judgments_, policy_, skip_underpopulated);
}

Json to_json(const Progress& p) {
  return {{"total", p.total},         {"pending", p.pending},
          {"in_progress", p.in_progress}, {"done", p.done},
          {"judgments", p.judgments}, {"per_annotator", p.per_annotator}};
}

Json to_json(const AnnotationItem& item, std::size_t judgments) {
  Json diff = Json::array();
  for (const auto& s : item.diff) diff.push_back(aligner::to_json(s));
  return {{"item_id", item.item_id},
          {"category", aligner::to_string(item.category)},
          {"source", item.source},
          {"corrected", item.corrected},
          {"ops", aligner::to_json(item.alignment)["ops"]},
          {"diff", diff},
          {"status", to_string(item.status)},
          {"judgments", judgments}};
}

}  // namespace gecforge::annotation
