#include "gecforge/corruptor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "gecforge/error.hpp"
#include "gecforge/parallel.hpp"

namespace gecforge::corruptor {

void CorruptionConfig::validate() const {
  auto check = [](const char* name, double p) {
    if (!(p >= 0.0 && p <= 1.0))
      throw ConfigError(std::string(name) + " must be in [0,1], got " + std::to_string(p));
  };
  check("p_delete", p_delete);
  check("p_add", p_add);
  check("p_replace", p_replace);
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw ConfigError("sigma must be >= 0, got " + std::to_string(sigma));
}

std::string to_string(OpKind kind) {
  switch (kind) {
    case OpKind::Delete: return "Delete";
    case OpKind::Add: return "Add";
    case OpKind::Replace: return "Replace";
    case OpKind::Shuffle: return "Shuffle";
  }
  return "?";
}

OpKind parse_op_kind(const std::string& name) {
  if (name == "Delete") return OpKind::Delete;
  if (name == "Add") return OpKind::Add;
  if (name == "Replace") return OpKind::Replace;
  if (name == "Shuffle") return OpKind::Shuffle;
  throw FormatError("unknown corruption op kind '" + name + "'");
}

SiteCounts& SiteCounts::operator+=(const SiteCounts& o) {
  delete_sites += o.delete_sites;
  deletions += o.deletions;
  add_sites += o.add_sites;
  additions += o.additions;
  replace_sites += o.replace_sites;
  replacements += o.replacements;
  shuffles += o.shuffles;
  return *this;
}

namespace {
double ratio(std::size_t a, std::size_t b) {
  return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
}
}  // namespace

double SiteCounts::delete_rate() const { return ratio(deletions, delete_sites); }
double SiteCounts::add_rate() const { return ratio(additions, add_sites); }
double SiteCounts::replace_rate() const { return ratio(replacements, replace_sites); }

Vocabulary Vocabulary::from_counts(
    const std::vector<std::pair<std::string, std::uint64_t>>& counts) {
  std::map<std::string, std::uint64_t> merged;
  for (const auto& [tok, c] : counts)
    if (c > 0) merged[tok] += c;
  Vocabulary v;
  for (const auto& [tok, c] : merged) {
    v.total_ += c;
    v.tokens_.push_back(tok);
    v.cumulative_.push_back(v.total_);
  }
  return v;
}

Vocabulary Vocabulary::from_sentences(const std::vector<ingest::SentenceRecord>& corpus) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& s : corpus)
    for (const auto& t : s.tokens) ++counts[t];
  return from_counts({counts.begin(), counts.end()});
}

const std::string& Vocabulary::sample(Rng& rng) const {
  std::uint64_t r = rng.below(total_);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
  return tokens_[static_cast<std::size_t>(it - cumulative_.begin())];
}

std::optional<std::string> Vocabulary::sample_excluding(Rng& rng,
                                                        const std::string& excluded) const {
  auto pos = std::lower_bound(tokens_.begin(), tokens_.end(), excluded);
  if (pos == tokens_.end() || *pos != excluded) return sample(rng);
  auto k = static_cast<std::size_t>(pos - tokens_.begin());
  const std::uint64_t before = k == 0 ? 0 : cumulative_[k - 1];
  const std::uint64_t width = cumulative_[k] - before;
  if (total_ == width) return std::nullopt;
  std::uint64_t r = rng.below(total_ - width);
  if (r >= before) r += width;
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
  return tokens_[static_cast<std::size_t>(it - cumulative_.begin())];
}

Shuffled shuffle_positions(const TokenSeq& tokens, double sigma, Rng& rng) {
  Shuffled out;
  out.permutation.resize(tokens.size());
  std::iota(out.permutation.begin(), out.permutation.end(), std::size_t{0});
  if (sigma > 0.0 && tokens.size() >= 2) {
    std::vector<double> keys(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i)
      keys[i] = static_cast<double>(i) + sigma * rng.normal();
    std::stable_sort(out.permutation.begin(), out.permutation.end(),
                     [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  }
  out.tokens.reserve(tokens.size());
  for (auto idx : out.permutation) out.tokens.push_back(tokens[idx]);
  return out;
}

CorruptionResult corrupt(const TokenSeq& sentence, const CorruptionConfig& config,
                         std::uint64_t item_seed, const Vocabulary& vocabulary) {
  if (sentence.empty()) throw InputError("cannot corrupt an empty sentence");
  if ((config.p_add > 0.0 || config.p_replace > 0.0) && vocabulary.empty())
    throw ConfigError("addition/replacement enabled but the vocabulary is empty");

  CorruptionResult res;
  res.record.item_seed = item_seed;
  auto& ops = res.record.ops;
  auto& sites = res.sites;
  Rng rng(item_seed);

  // 1. deletion
  TokenSeq current;
  current.reserve(sentence.size() * 2);
  sites.delete_sites = sentence.size();
  for (const auto& tok : sentence) {
    if (rng.bernoulli(config.p_delete)) {
      ops.push_back({OpKind::Delete, current.size(), {}, {}});
      ++sites.deletions;
    } else {
      current.push_back(tok);
    }
  }

  // 2. addition, one draw per gap of the post-deletion sequence
  std::vector<bool> original(current.size(), true);
  {
    const std::size_t m = current.size();
    sites.add_sites = m + 1;
    TokenSeq next;
    std::vector<bool> next_original;
    next.reserve(m * 2 + 1);
    for (std::size_t gap = 0; gap <= m; ++gap) {
      if (rng.bernoulli(config.p_add)) {
        const std::string& tok = vocabulary.sample(rng);
        ops.push_back({OpKind::Add, next.size(), tok, {}});
        next.push_back(tok);
        next_original.push_back(false);
        ++sites.additions;
      }
      if (gap < m) {
        next.push_back(std::move(current[gap]));
        next_original.push_back(true);
      }
    }
    current = std::move(next);
    original = std::move(next_original);
  }

  // 3. replacement of surviving original tokens
  for (std::size_t i = 0; i < current.size(); ++i) {
    if (!original[i]) continue;
    ++sites.replace_sites;
    if (rng.bernoulli(config.p_replace)) {
      auto tok = vocabulary.sample_excluding(rng, current[i]);
      if (!tok) continue;
      ops.push_back({OpKind::Replace, i, *tok, {}});
      current[i] = std::move(*tok);
      ++sites.replacements;
    }
  }

  // 4. position deviation
  auto shuffled = shuffle_positions(current, config.sigma, rng);
  bool moved = false;
  for (std::size_t j = 0; j < shuffled.permutation.size(); ++j)
    moved = moved || shuffled.permutation[j] != j;
  if (moved) {
    ops.push_back({OpKind::Shuffle, 0, {}, shuffled.permutation});
    ++sites.shuffles;
  }
  res.corrupted = std::move(shuffled.tokens);
  return res;
}

TokenSeq replay(const TokenSeq& original, const std::vector<CorruptionOp>& ops) {
  TokenSeq seq = original;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const auto& op = ops[k];
    auto fail = [&](const std::string& why) {
      throw ConsistencyError("corruption op " + std::to_string(k) + " (" +
                             to_string(op.kind) + "): " + why);
    };
    switch (op.kind) {
      case OpKind::Delete:
        if (op.position >= seq.size()) fail("position out of bounds");
        seq.erase(seq.begin() + static_cast<std::ptrdiff_t>(op.position));
        break;
      case OpKind::Add:
        if (op.position > seq.size()) fail("position out of bounds");
        seq.insert(seq.begin() + static_cast<std::ptrdiff_t>(op.position), op.token);
        break;
      case OpKind::Replace:
        if (op.position >= seq.size()) fail("position out of bounds");
        seq[op.position] = op.token;
        break;
      case OpKind::Shuffle: {
        if (op.permutation.size() != seq.size()) fail("permutation size mismatch");
        std::vector<bool> seen(seq.size(), false);
        TokenSeq next;
        next.reserve(seq.size());
        for (auto idx : op.permutation) {
          if (idx >= seq.size() || seen[idx]) fail("not a permutation");
          seen[idx] = true;
          next.push_back(seq[idx]);
        }
        seq = std::move(next);
        break;
      }
    }
  }
  return seq;
}

std::uint64_t item_seed_for(std::uint64_t seed, const std::string& sentence_id) {
  return derive_seed(seed, sentence_id);
}

CorpusCorruption corrupt_corpus(const std::vector<ingest::SentenceRecord>& corpus,
                                const CorruptionConfig& config, std::size_t workers,
                                const Vocabulary* vocabulary) {
  if (corpus.empty()) throw InputError("cannot corrupt an empty corpus");
  config.validate();
  Vocabulary built;
  if (!vocabulary) {
    built = Vocabulary::from_sentences(corpus);
    vocabulary = &built;
  }

  std::vector<CorruptionResult> results(corpus.size());
  parallel_for(corpus.size(), workers, [&](std::size_t i) {
    const auto& s = corpus[i];
    results[i] = corrupt(s.tokens, config, item_seed_for(config.seed, s.id), *vocabulary);
    results[i].record.source_id = s.id;
  });

  CorpusCorruption out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto& r = results[i];
    out.sites += r.sites;
    if (r.corrupted.empty()) {
      ++out.dropped_empty;
      continue;
    }
    if (r.corrupted == corpus[i].tokens) {
      ++out.dropped_identical;
      continue;
    }
    out.pairs.push_back({corpus[i].id, std::move(r.corrupted), corpus[i].tokens});
    out.records.push_back(std::move(r.record));
  }
  return out;
}

Json to_json(const CorruptionRecord& record) {
  Json ops = Json::array();
  for (const auto& op : record.ops) {
    Json j = {{"kind", to_string(op.kind)}, {"position", op.position}};
    if (op.kind == OpKind::Add || op.kind == OpKind::Replace) j["token"] = op.token;
    if (op.kind == OpKind::Shuffle) j["permutation"] = op.permutation;
    ops.push_back(std::move(j));
  }
  return {{"source_id", record.source_id}, {"item_seed", record.item_seed}, {"ops", ops}};
}

CorruptionRecord record_from_json(const Json& j) {
  try {
    CorruptionRecord r;
    r.source_id = j.at("source_id").get<std::string>();
    r.item_seed = j.at("item_seed").get<std::uint64_t>();
    for (const auto& o : j.at("ops")) {
      CorruptionOp op;
      op.kind = parse_op_kind(o.at("kind").get<std::string>());
      op.position = o.at("position").get<std::size_t>();
      if (o.contains("token")) op.token = o["token"].get<std::string>();
      if (o.contains("permutation"))
        op.permutation = o["permutation"].get<std::vector<std::size_t>>();
      r.ops.push_back(std::move(op));
    }
    return r;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed corruption record: ") + e.what());
  }
}

void write_record_log(const std::filesystem::path& path,
                      const std::vector<CorruptionRecord>& records) {
  std::vector<Json> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(to_json(r));
  write_jsonl(path, out);
}

std::vector<CorruptionRecord> read_record_log(const std::filesystem::path& path) {
  std::vector<CorruptionRecord> out;
  for (const auto& j : read_jsonl(path)) out.push_back(record_from_json(j));
  return out;
}

const std::vector<ErrorTypeOperations>& error_type_operation_table() {
  static const std::vector<ErrorTypeOperations> table = {
      {"Subject Verb Agreement Error", true, true, true, true},
      {"Word Order Error", false, false, false, true},
      {"Noun Adjective Agreement Error", true, true, true, true},
      {"Preposition Error", true, true, true, true},
      {"Pronoun Error", true, true, true, true},
      {"Punctuation Error", true, true, true, true},
      {"Article Error", true, true, true, true},
      {"Conjunction Error", true, true, true, true},
      {"Redundancy", false, true, false, false},
      {"Sentence Fragmentation", true, false, false, false},
  };
  return table;
}

std::string render_report(const CorruptionConfig& config, const CorpusCorruption& result) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << "config\tp_delete=" << config.p_delete << "\tp_add=" << config.p_add
     << "\tp_replace=" << config.p_replace << "\tsigma=" << config.sigma
     << "\tseed=" << config.seed << "\n";
  os << "pairs_emitted\t" << result.pairs.size() << "\n";
  os << "dropped_identical\t" << result.dropped_identical << "\n";
  os << "dropped_empty\t" << result.dropped_empty << "\n";
  const auto& s = result.sites;
  os << "pass\tsites\tapplied\trate\n";
  os << "delete\t" << s.delete_sites << "\t" << s.deletions << "\t" << s.delete_rate() << "\n";
  os << "add\t" << s.add_sites << "\t" << s.additions << "\t" << s.add_rate() << "\n";
  os << "replace\t" << s.replace_sites << "\t" << s.replacements << "\t" << s.replace_rate()
     << "\n";
  os << "shuffle\t-\t" << s.shuffles << "\t-\n";
  os << "\nerror_type\tdeletion\taddition\treplacement\tposition_deviation\n";
  auto mark = [](bool b) { return b ? "x" : "-"; };
  for (const auto& row : error_type_operation_table())
    os << row.error_type << "\t" << mark(row.deletion) << "\t" << mark(row.addition) << "\t"
       << mark(row.replacement) << "\t" << mark(row.position_deviation) << "\n";
  return os.str();
}

}  // namespace gecforge::corruptor
