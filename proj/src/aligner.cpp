#include "gecforge/aligner.hpp"

#include <algorithm>
#include <utility>

#include "gecforge/error.hpp"

namespace gecforge::aligner {

std::string to_string(EditKind kind) {
  switch (kind) {
    case EditKind::Insert: return "Insert";
    case EditKind::Delete: return "Delete";
    case EditKind::Substitute: return "Substitute";
  }
  return "?";
}

EditKind parse_edit_kind(const std::string& name) {
  if (name == "Insert") return EditKind::Insert;
  if (name == "Delete") return EditKind::Delete;
  if (name == "Substitute") return EditKind::Substitute;
  throw FormatError("unknown edit kind '" + name + "'");
}

std::string to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Missing1: return "missing_1";
    case ErrorCategory::Missing2: return "missing_2";
    case ErrorCategory::Missing3: return "missing_3";
    case ErrorCategory::Misadding1: return "misadding_1";
    case ErrorCategory::Misadding2: return "misadding_2";
    case ErrorCategory::Misadding3: return "misadding_3";
    case ErrorCategory::Misusing1: return "misusing_1";
    case ErrorCategory::Misusing2: return "misusing_2";
    case ErrorCategory::Misusing3: return "misusing_3";
    case ErrorCategory::NoChange: return "no_change";
    case ErrorCategory::Mixed: return "mixed";
    case ErrorCategory::OverLimit: return "over_limit";
  }
  return "?";
}

ErrorCategory parse_category(const std::string& name) {
  for (auto c : kAllCategories)
    if (to_string(c) == name) return c;
  throw FormatError("unknown error category '" + name + "'");
}

bool is_pure(ErrorCategory c) {
  return std::find(kPureCategories.begin(), kPureCategories.end(), c) !=
         kPureCategories.end();
}

std::string describe(ErrorCategory c) {
  static const char* kCount[] = {"one word", "two words", "three words"};
  auto idx = static_cast<std::size_t>(c);
  if (idx < 3) return std::string("missing ") + kCount[idx];
  if (idx < 6) return std::string("misadding ") + kCount[idx - 3];
  if (idx < 9) return std::string("misusing ") + kCount[idx - 6];
  if (c == ErrorCategory::NoChange) return "no change";
  if (c == ErrorCategory::Mixed) return "mixed edits";
  return "more than three edits";
}

ErrorCategory pure_category(EditKind kind, std::size_t k) {
  if (k < 1 || k > kMaxCategoryEdits)
    throw InputError("pure categories cover 1..3 edits, got " + std::to_string(k));
  std::size_t base = kind == EditKind::Insert ? 0 : kind == EditKind::Delete ? 3 : 6;
  return kAllCategories[base + k - 1];
}

namespace {

// Costs kept in a flat (n+1) x (m+1) table.
// (edit cost, indel count), compared lexicographically.
using Cost = std::pair<std::size_t, std::size_t>;

struct Table {
  std::size_t cols;
  std::vector<Cost> d;
  Cost& at(std::size_t i, std::size_t j) { return d[i * cols + j]; }
};

Cost plus(Cost c, std::size_t edit, std::size_t indel) { return {c.first + edit, c.second + indel}; }

}  // namespace

Alignment align(const TokenSeq& source, const TokenSeq& corrected) {
  if (source.empty() || corrected.empty())
    throw InputError("align requires non-empty source and corrected sequences");
  const std::size_t n = source.size();
  const std::size_t m = corrected.size();
  Table t{m + 1, std::vector<Cost>((n + 1) * (m + 1))};
  for (std::size_t i = 0; i <= n; ++i) t.at(i, 0) = {i, i};
  for (std::size_t j = 0; j <= m; ++j) t.at(0, j) = {j, j};
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const Cost diag = plus(t.at(i - 1, j - 1), source[i - 1] == corrected[j - 1] ? 0 : 1, 0);
      t.at(i, j) = std::min({diag, plus(t.at(i - 1, j), 1, 1), plus(t.at(i, j - 1), 1, 1)});
    }
  }

  Alignment a;
  a.distance = t.at(n, m).first;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const Cost here = t.at(i, j);
    if (i > 0 && j > 0 && source[i - 1] == corrected[j - 1] && t.at(i - 1, j - 1) == here) {
      --i, --j;
    } else if (i > 0 && j > 0 && source[i - 1] != corrected[j - 1] &&
               plus(t.at(i - 1, j - 1), 1, 0) == here) {
      a.ops.push_back({EditKind::Substitute, i - 1, source[i - 1], corrected[j - 1]});
      --i, --j;
    } else if (i > 0 && plus(t.at(i - 1, j), 1, 1) == here) {
      a.ops.push_back({EditKind::Delete, i - 1, source[i - 1], {}});
      --i;
    } else {
      a.ops.push_back({EditKind::Insert, i, {}, corrected[j - 1]});
      --j;
    }
  }
  std::reverse(a.ops.begin(), a.ops.end());
  return a;
}

std::size_t edit_distance(const TokenSeq& a, const TokenSeq& b) {
  const TokenSeq& longer = a.size() >= b.size() ? a : b;
  const TokenSeq& shorter = a.size() >= b.size() ? b : a;
  std::vector<std::size_t> row(shorter.size() + 1);
  for (std::size_t j = 0; j <= shorter.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= longer.size(); ++i) {
    std::size_t prev_diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= shorter.size(); ++j) {
      std::size_t up = row[j];
      row[j] = std::min({prev_diag + (longer[i - 1] == shorter[j - 1] ? 0 : 1), up + 1,
                         row[j - 1] + 1});
      prev_diag = up;
    }
  }
  return row[shorter.size()];
}

TokenSeq apply(const TokenSeq& source, const std::vector<EditOp>& ops) {
  TokenSeq out;
  out.reserve(source.size() + ops.size());
  std::size_t next = 0;  // next unconsumed source index
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const auto& op = ops[k];
    auto fail = [&](const std::string& why) {
      throw ConsistencyError("edit op " + std::to_string(k) + " (" + to_string(op.kind) +
                             " @" + std::to_string(op.source_pos) + "): " + why);
    };
    if (op.source_pos < next || op.source_pos > source.size()) fail("position out of order");
    while (next < op.source_pos) out.push_back(source[next++]);
    switch (op.kind) {
      case EditKind::Insert:
        out.push_back(op.token_after);
        break;
      case EditKind::Delete:
        if (next >= source.size() || source[next] != op.token_before)
          fail("deleted token does not match source");
        ++next;
        break;
      case EditKind::Substitute:
        if (next >= source.size() || source[next] != op.token_before)
          fail("substituted token does not match source");
        if (op.token_before == op.token_after) fail("substitution with identical token");
        out.push_back(op.token_after);
        ++next;
        break;
    }
  }
  while (next < source.size()) out.push_back(source[next++]);
  return out;
}

ErrorCategory categorize(const Alignment& a) {
  if (a.distance == 0) return ErrorCategory::NoChange;
  if (a.distance > kMaxCategoryEdits) return ErrorCategory::OverLimit;
  const EditKind first = a.ops.front().kind;
  for (const auto& op : a.ops)
    if (op.kind != first) return ErrorCategory::Mixed;
  return pure_category(first, a.ops.size());
}

std::pair<ErrorCategory, Alignment> classify_pair(const TokenSeq& source,
                                                  const TokenSeq& corrected) {
  Alignment a = align(source, corrected);
  return {categorize(a), std::move(a)};
}

std::string to_string(SpanKind kind) {
  switch (kind) {
    case SpanKind::Kept: return "kept";
    case SpanKind::Inserted: return "inserted";
    case SpanKind::Substituted: return "substituted";
    case SpanKind::Deleted: return "deleted";
  }
  return "?";
}

std::vector<DiffSpan> render_diff(const Alignment& alignment, const TokenSeq& source,
                                  const TokenSeq& corrected) {
  if (alignment.distance != alignment.ops.size())
    throw ConsistencyError("alignment distance " + std::to_string(alignment.distance) +
                           " does not match op count " +
                           std::to_string(alignment.ops.size()));
  if (apply(source, alignment.ops) != corrected)
    throw ConsistencyError("alignment does not transform source into corrected");

  std::vector<DiffSpan> spans;
  std::size_t next = 0;
  for (const auto& op : alignment.ops) {
    while (next < op.source_pos) {
      spans.push_back({SpanKind::Kept, source[next], source[next]});
      ++next;
    }
    switch (op.kind) {
      case EditKind::Insert:
        spans.push_back({SpanKind::Inserted, std::nullopt, op.token_after});
        break;
      case EditKind::Delete:
        spans.push_back({SpanKind::Deleted, op.token_before, std::nullopt});
        ++next;
        break;
      case EditKind::Substitute:
        spans.push_back({SpanKind::Substituted, op.token_before, op.token_after});
        ++next;
        break;
    }
  }
  while (next < source.size()) {
    spans.push_back({SpanKind::Kept, source[next], source[next]});
    ++next;
  }
  return spans;
}

TokenSeq reconstruct_source(const std::vector<DiffSpan>& spans) {
  TokenSeq out;
  for (const auto& s : spans)
    if (s.source) out.push_back(*s.source);
  return out;
}

TokenSeq reconstruct_corrected(const std::vector<DiffSpan>& spans) {
  TokenSeq out;
  for (const auto& s : spans)
    if (s.corrected) out.push_back(*s.corrected);
  return out;
}

std::string op_summary(const Alignment& alignment) {
  if (alignment.ops.empty()) return "-";
  std::string out;
  for (const auto& op : alignment.ops) {
    if (!out.empty()) out.push_back(';');
    const std::string pos = std::to_string(op.source_pos);
    switch (op.kind) {
      case EditKind::Insert: out += "I@" + pos + ":" + op.token_after; break;
      case EditKind::Delete: out += "D@" + pos + ":" + op.token_before; break;
      case EditKind::Substitute:
        out += "S@" + pos + ":" + op.token_before + ">" + op.token_after;
        break;
    }
  }
  return out;
}

Json to_json(const EditOp& op) {
  Json j = {{"kind", to_string(op.kind)}, {"source_pos", op.source_pos}};
  if (op.kind != EditKind::Insert) j["token_before"] = op.token_before;
  if (op.kind != EditKind::Delete) j["token_after"] = op.token_after;
  return j;
}

EditOp edit_op_from_json(const Json& j) {
  EditOp op;
  op.kind = parse_edit_kind(j.at("kind").get<std::string>());
  op.source_pos = j.at("source_pos").get<std::size_t>();
  op.token_before = j.value("token_before", std::string{});
  op.token_after = j.value("token_after", std::string{});
  return op;
}

Json to_json(const Alignment& a) {
  Json ops = Json::array();
  for (const auto& op : a.ops) ops.push_back(to_json(op));
  return {{"distance", a.distance}, {"ops", ops}};
}

Alignment alignment_from_json(const Json& j) {
  Alignment a;
  a.distance = j.at("distance").get<std::size_t>();
  for (const auto& o : j.at("ops")) a.ops.push_back(edit_op_from_json(o));
  return a;
}

Json to_json(const DiffSpan& span) {
  Json j = {{"kind", to_string(span.kind)}};
  if (span.source) j["source"] = *span.source;
  if (span.corrected) j["corrected"] = *span.corrected;
  return j;
}

}  // namespace gecforge::aligner
