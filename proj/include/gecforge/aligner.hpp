#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gecforge/io.hpp"
#include "gecforge/tokens.hpp"

namespace gecforge::aligner {

enum class EditKind { Insert, Delete, Substitute };

std::string to_string(EditKind kind);
EditKind parse_edit_kind(const std::string& name);

/// One word-level edit turning source into corrected. For Insert,
/// source_pos is the source index the new token goes before (may equal the
/// source length).
struct EditOp {
  EditKind kind = EditKind::Insert;
  std::size_t source_pos = 0;
  std::string token_before;
  std::string token_after;

  bool operator==(const EditOp&) const = default;
};

struct Alignment {
  std::vector<EditOp> ops;  // in path order, nondecreasing source_pos
  std::size_t distance = 0;

  bool operator==(const Alignment&) const = default;
};

enum class ErrorCategory {
  Missing1,
  Missing2,
  Missing3,
  Misadding1,
  Misadding2,
  Misadding3,
  Misusing1,
  Misusing2,
  Misusing3,
  NoChange,
  Mixed,
  OverLimit,
};

inline constexpr std::array<ErrorCategory, 9> kPureCategories = {
    ErrorCategory::Missing1,   ErrorCategory::Missing2,   ErrorCategory::Missing3,
    ErrorCategory::Misadding1, ErrorCategory::Misadding2, ErrorCategory::Misadding3,
    ErrorCategory::Misusing1,  ErrorCategory::Misusing2,  ErrorCategory::Misusing3,
};

inline constexpr std::array<ErrorCategory, 12> kAllCategories = {
    ErrorCategory::Missing1,   ErrorCategory::Missing2,   ErrorCategory::Missing3,
    ErrorCategory::Misadding1, ErrorCategory::Misadding2, ErrorCategory::Misadding3,
    ErrorCategory::Misusing1,  ErrorCategory::Misusing2,  ErrorCategory::Misusing3,
    ErrorCategory::NoChange,   ErrorCategory::Mixed,      ErrorCategory::OverLimit,
};

inline constexpr std::size_t kMaxCategoryEdits = 3;

/// Short names: "missing_1" .. "misusing_3", "no_change", "mixed", "over_limit".
std::string to_string(ErrorCategory category);
ErrorCategory parse_category(const std::string& name);
bool is_pure(ErrorCategory category);

/// Long form used in reports, e.g. "missing one word".
std::string describe(ErrorCategory category);

/// The pure category for k same-kind edits, k in 1..3.
ErrorCategory pure_category(EditKind kind, std::size_t k);

/// Unit-cost Levenshtein alignment. Among minimum-cost alignments the one
/// with the fewest insertions plus deletions is chosen, so an all-substitution
/// alignment wins whenever it is optimal. Remaining ties are broken in the
/// backtrace: match, then Substitute, then Delete, then Insert. Throws
/// InputError if either sequence is empty.
Alignment align(const TokenSeq& source, const TokenSeq& corrected);

/// Distance only, O(min) memory. No emptiness precondition.
std::size_t edit_distance(const TokenSeq& a, const TokenSeq& b);

/// Applies ops to source. Throws ConsistencyError if an op does not fit.
TokenSeq apply(const TokenSeq& source, const std::vector<EditOp>& ops);

/// Category from an alignment: NoChange at distance 0, a pure category when
/// 1..3 ops share a kind (Insert=missing, Delete=misadding,
/// Substitute=misusing), Mixed for 1..3 heterogeneous ops, OverLimit above 3.
ErrorCategory categorize(const Alignment& alignment);

std::pair<ErrorCategory, Alignment> classify_pair(const TokenSeq& source,
                                                  const TokenSeq& corrected);

enum class SpanKind { Kept, Inserted, Substituted, Deleted };

std::string to_string(SpanKind kind);

/// One rendered position. Kept/Substituted carry both tokens, Inserted only
/// `corrected`, Deleted only `source`.
struct DiffSpan {
  SpanKind kind = SpanKind::Kept;
  std::optional<std::string> source;
  std::optional<std::string> corrected;

  bool operator==(const DiffSpan&) const = default;
};

/// Throws ConsistencyError if the alignment does not transform source into
/// corrected.
std::vector<DiffSpan> render_diff(const Alignment& alignment, const TokenSeq& source,
                                  const TokenSeq& corrected);

TokenSeq reconstruct_source(const std::vector<DiffSpan>& spans);
TokenSeq reconstruct_corrected(const std::vector<DiffSpan>& spans);

/// Compact op list, e.g. "I@1:sedang;S@3:a>b;D@5:c"; "-" when empty.
std::string op_summary(const Alignment& alignment);

Json to_json(const EditOp& op);
EditOp edit_op_from_json(const Json& j);
Json to_json(const Alignment& alignment);
Alignment alignment_from_json(const Json& j);
Json to_json(const DiffSpan& span);

}  // namespace gecforge::aligner
