#include "gecforge/selector.hpp"

#include <algorithm>
#include <set>

#include "gecforge/error.hpp"
#include "gecforge/random.hpp"

namespace gecforge::selector {

namespace fs = std::filesystem;
using aligner::ErrorCategory;

std::vector<std::string> SampleManifest::all_ids() const {
  std::vector<std::string> out;
  for (const auto& [cat, s] : per_category) out.insert(out.end(), s.ids.begin(), s.ids.end());
  return out;
}

SampleManifest stratified_sample(const model_bridge::CandidateSet& candidates,
                                 std::size_t n_per_category, std::uint64_t seed) {
  std::map<ErrorCategory, std::vector<std::string>> members;
  for (auto cat : aligner::kPureCategories) members[cat];
  for (const auto& c : candidates.pairs)
    if (aligner::is_pure(c.category)) members[c.category].push_back(c.id);

  SampleManifest m;
  m.n_per_category = n_per_category;
  m.seed = seed;
  for (auto& [cat, ids] : members) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    CategorySample s;
    s.available = ids.size();
    const std::size_t take = std::min(n_per_category, ids.size());
    s.shortfall = n_per_category - take;
    Rng rng(derive_seed(seed, aligner::to_string(cat)));
    auto order = shuffled_indices(ids.size(), rng);
    for (std::size_t k = 0; k < take; ++k) s.ids.push_back(ids[order[k]]);
    std::sort(s.ids.begin(), s.ids.end());
    m.per_category[cat] = std::move(s);
  }
  return m;
}

void write_manifest(const fs::path& path, const SampleManifest& m) {
  std::vector<Json> out;
  out.push_back({{"type", "header"}, {"n_per_category", m.n_per_category}, {"seed", m.seed}});
  for (const auto& [cat, s] : m.per_category)
    out.push_back({{"type", "category"},
                   {"category", aligner::to_string(cat)},
                   {"available", s.available},
                   {"sampled", s.ids.size()},
                   {"shortfall", s.shortfall},
                   {"ids", s.ids}});
  write_jsonl(path, out);
}

SampleManifest read_manifest(const fs::path& path) {
  SampleManifest m;
  std::set<std::string> seen;
  bool header = false;
  for (const auto& j : read_jsonl(path)) {
    auto type = j.value("type", std::string{});
    if (type == "header") {
      m.n_per_category = j.at("n_per_category").get<std::size_t>();
      m.seed = j.at("seed").get<std::uint64_t>();
      header = true;
    } else if (type == "category") {
      auto cat = aligner::parse_category(j.at("category").get<std::string>());
      CategorySample s;
      s.ids = j.at("ids").get<std::vector<std::string>>();
      s.available = j.value("available", s.ids.size());
      s.shortfall = j.value("shortfall", std::size_t{0});
      for (const auto& id : s.ids)
        if (!seen.insert(id).second)
          throw ValidationError(path.string() + ": id '" + id + "' listed twice");
      m.per_category[cat] = std::move(s);
    } else {
      throw FormatError(path.string() + ": unknown manifest record type '" + type + "'");
    }
  }
  if (!header) throw FormatError(path.string() + ": sample manifest has no header record");
  return m;
}

std::string render_manifest_table(const SampleManifest& m) {
  std::string out = "category\tavailable\tsampled\tshortfall\n";
  std::size_t a = 0, s = 0, f = 0;
  for (const auto& [cat, cs] : m.per_category) {
    out += aligner::to_string(cat) + "\t" + std::to_string(cs.available) + "\t" +
           std::to_string(cs.ids.size()) + "\t" + std::to_string(cs.shortfall) + "\n";
    a += cs.available, s += cs.ids.size(), f += cs.shortfall;
  }
  out += "total\t" + std::to_string(a) + "\t" + std::to_string(s) + "\t" + std::to_string(f) +
         "\n";
  return out;
}

bool retained(const FinalLabel& label) {
  return label.subtask1 == CorrectionLabel::Accurate &&
         label.subtask2 == ResidualLabel::NoErrors;
}

std::vector<GoldItem> retention_filter(const std::vector<FinalLabel>& labels,
                                       const model_bridge::CandidateSet& candidates) {
  std::vector<std::string> missing;
  for (const auto& l : labels)
    if (!l.subtask1 || !l.subtask2) missing.push_back(l.item_id);
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw ValidationError("items without a final label for both subtasks: " + list);
  }
  std::map<std::string, const model_bridge::Candidate*> by_id;
  for (const auto& c : candidates.pairs) by_id[c.id] = &c;

  std::vector<GoldItem> gold;
  std::vector<std::string> unknown;
  for (const auto& l : labels) {
    if (!retained(l)) continue;
    auto it = by_id.find(l.item_id);
    if (it == by_id.end()) {
      unknown.push_back(l.item_id);
      continue;
    }
    gold.push_back({l.item_id, l.category, it->second->source, it->second->hypothesis});
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& id : unknown) list += (list.empty() ? "" : ", ") + id;
    throw LoadError("labels reference unknown candidate ids: " + list);
  }
  std::sort(gold.begin(), gold.end(),
            [](const GoldItem& a, const GoldItem& b) { return a.id < b.id; });
  return gold;
}

void write_gold(const fs::path& path, const std::vector<GoldItem>& gold) {
  std::vector<Json> out;
  for (const auto& g : gold)
    out.push_back({{"id", g.id},
                   {"category", aligner::to_string(g.category)},
                   {"source", g.source},
                   {"corrected", g.corrected}});
  write_jsonl(path, out);
}

std::vector<GoldItem> read_gold(const fs::path& path) {
  std::vector<GoldItem> out;
  for (const auto& j : read_jsonl(path))
    out.push_back({j.at("id").get<std::string>(),
                   aligner::parse_category(j.at("category").get<std::string>()),
                   j.at("source").get<TokenSeq>(), j.at("corrected").get<TokenSeq>()});
  return out;
}

const std::vector<ErrorCategory>& table_row_order() {
  static const std::vector<ErrorCategory> order = {
      ErrorCategory::Misadding1, ErrorCategory::Missing1, ErrorCategory::Misusing1,
      ErrorCategory::Misadding2, ErrorCategory::Missing2, ErrorCategory::Misusing2,
      ErrorCategory::Misadding3, ErrorCategory::Missing3, ErrorCategory::Misusing3,
  };
  return order;
}

CorpusStats corpus_stats(const std::vector<GoldItem>& gold) {
  CorpusStats stats;
  for (auto cat : table_row_order()) stats.counts[cat] = 0;
  for (const auto& g : gold) {
    if (!aligner::is_pure(g.category)) continue;
    ++stats.counts[g.category];
    ++stats.total;
  }
  return stats;
}

std::string render_stats(const CorpusStats& stats) {
  std::string out = "Type\tNumber\n";
  for (auto cat : table_row_order())
    out += aligner::describe(cat) + "\t" + std::to_string(stats.counts.at(cat)) + "\n";
  out += "Sum\t" + std::to_string(stats.total) + "\n";
  return out;
}

std::vector<Json> stats_records(const CorpusStats& stats) {
  std::vector<Json> out;
  for (auto cat : table_row_order())
    out.push_back({{"category", aligner::to_string(cat)},
                   {"type", aligner::describe(cat)},
                   {"count", stats.counts.at(cat)}});
  out.push_back({{"category", "total"}, {"type", "Sum"}, {"count", stats.total}});
  return out;
}

std::map<ErrorCategory, SubtaskTallies> annotation_report(const std::vector<FinalLabel>& labels) {
  std::map<ErrorCategory, SubtaskTallies> report;
  for (const auto& l : labels) {
    if (l.judgments == 0) continue;
    auto& t = report[l.category];
    ++t.items;
    switch (l.subtask1.value_or(CorrectionLabel::Undetermined)) {
      case CorrectionLabel::Accurate: ++t.accurate; break;
      case CorrectionLabel::Inaccurate: ++t.inaccurate; break;
      case CorrectionLabel::Undetermined: ++t.undetermined_1; break;
    }
    switch (l.subtask2.value_or(ResidualLabel::Undetermined)) {
      case ResidualLabel::NoErrors: ++t.no_errors; break;
      case ResidualLabel::HasErrors: ++t.has_errors; break;
      case ResidualLabel::Undetermined: ++t.undetermined_2; break;
    }
  }
  return report;
}

std::string render_annotation_report(const std::map<ErrorCategory, SubtaskTallies>& report) {
  std::string out =
      "category\titems\ts1_accurate\ts1_inaccurate\ts1_undetermined\ts2_no_errors\t"
      "s2_has_errors\ts2_undetermined\n";
  for (auto cat : table_row_order()) {
    auto it = report.find(cat);
    if (it == report.end()) continue;
    const auto& t = it->second;
    out += aligner::to_string(cat) + "\t" + std::to_string(t.items) + "\t" +
           std::to_string(t.accurate) + "\t" + std::to_string(t.inaccurate) + "\t" +
           std::to_string(t.undetermined_1) + "\t" + std::to_string(t.no_errors) + "\t" +
           std::to_string(t.has_errors) + "\t" + std::to_string(t.undetermined_2) + "\n";
  }
  for (const auto& [cat, t] : report) {
    if (aligner::is_pure(cat)) continue;
    out += aligner::to_string(cat) + "\t" + std::to_string(t.items) + "\t" +
           std::to_string(t.accurate) + "\t" + std::to_string(t.inaccurate) + "\t" +
           std::to_string(t.undetermined_1) + "\t" + std::to_string(t.no_errors) + "\t" +
           std::to_string(t.has_errors) + "\t" + std::to_string(t.undetermined_2) + "\n";
  }
  return out;
}

std::vector<Json> annotation_report_records(
    const std::map<ErrorCategory, SubtaskTallies>& report) {
  std::vector<Json> out;
  for (const auto& [cat, t] : report)
    out.push_back({{"category", aligner::to_string(cat)},
                   {"items", t.items},
                   {"subtask1", {{"accurate", t.accurate},
                                 {"inaccurate", t.inaccurate},
                                 {"undetermined", t.undetermined_1}}},
                   {"subtask2", {{"no_errors", t.no_errors},
                                 {"has_errors", t.has_errors},
                                 {"undetermined", t.undetermined_2}}}});
  return out;
}

}  // namespace gecforge::selector
