#include "gecforge/model_bridge.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include "gecforge/error.hpp"
#include "gecforge/io.hpp"
#include "gecforge/parallel.hpp"

namespace gecforge::model_bridge {

namespace fs = std::filesystem;

const std::vector<std::string>& manifest_keys() {
  static const std::vector<std::string> keys = {
      "epochs",           "batch_size",      "max_tokens_per_batch", "lr_schedule",
      "max_lr",           "grad_clip",       "embed_dim",            "encoder_blocks",
      "decoder_blocks",   "attention_heads", "ffn_dim",              "activation_fn",
      "dropout",          "activation_dropout", "attention_dropout", "max_positions",
      "shared_embeddings", "beam_size",      "selection_metric",
  };
  return keys;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general);
  return std::string(buf, res.ptr);
}

int parse_int(const std::string& key, const std::string& value) {
  int out = 0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
    throw ConfigError("manifest key '" + key + "': expected an integer, got '" + value + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0;
  auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
    throw ConfigError("manifest key '" + key + "': expected a number, got '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("manifest key '" + key + "': expected true or false, got '" + value + "'");
}

std::string get_value(const TrainingManifest& m, const std::string& key) {
  if (key == "epochs") return std::to_string(m.epochs);
  if (key == "batch_size") return std::to_string(m.batch_size);
  if (key == "max_tokens_per_batch") return std::to_string(m.max_tokens_per_batch);
  if (key == "lr_schedule") return m.lr_schedule;
  if (key == "max_lr") return format_double(m.max_lr);
  if (key == "grad_clip") return format_double(m.grad_clip);
  if (key == "embed_dim") return std::to_string(m.embed_dim);
  if (key == "encoder_blocks") return std::to_string(m.encoder_blocks);
  if (key == "decoder_blocks") return std::to_string(m.decoder_blocks);
  if (key == "attention_heads") return std::to_string(m.attention_heads);
  if (key == "ffn_dim") return std::to_string(m.ffn_dim);
  if (key == "activation_fn") return m.activation_fn;
  if (key == "dropout") return format_double(m.dropout);
  if (key == "activation_dropout") return format_double(m.activation_dropout);
  if (key == "attention_dropout") return format_double(m.attention_dropout);
  if (key == "max_positions") return std::to_string(m.max_positions);
  if (key == "shared_embeddings") return m.shared_embeddings ? "true" : "false";
  if (key == "beam_size") return std::to_string(m.beam_size);
  if (key == "selection_metric") return m.selection_metric;
  throw ConfigError("unknown manifest key '" + key + "'");
}

}  // namespace

void set_manifest_value(TrainingManifest& m, const std::string& key, const std::string& v) {
  if (key == "epochs") m.epochs = parse_int(key, v);
  else if (key == "batch_size") m.batch_size = parse_int(key, v);
  else if (key == "max_tokens_per_batch") m.max_tokens_per_batch = parse_int(key, v);
  else if (key == "lr_schedule") m.lr_schedule = v;
  else if (key == "max_lr") m.max_lr = parse_double(key, v);
  else if (key == "grad_clip") m.grad_clip = parse_double(key, v);
  else if (key == "embed_dim") m.embed_dim = parse_int(key, v);
  else if (key == "encoder_blocks") m.encoder_blocks = parse_int(key, v);
  else if (key == "decoder_blocks") m.decoder_blocks = parse_int(key, v);
  else if (key == "attention_heads") m.attention_heads = parse_int(key, v);
  else if (key == "ffn_dim") m.ffn_dim = parse_int(key, v);
  else if (key == "activation_fn") m.activation_fn = v;
  else if (key == "dropout") m.dropout = parse_double(key, v);
  else if (key == "activation_dropout") m.activation_dropout = parse_double(key, v);
  else if (key == "attention_dropout") m.attention_dropout = parse_double(key, v);
  else if (key == "max_positions") m.max_positions = parse_int(key, v);
  else if (key == "shared_embeddings") m.shared_embeddings = parse_bool(key, v);
  else if (key == "beam_size") m.beam_size = parse_int(key, v);
  else if (key == "selection_metric") m.selection_metric = v;
  else throw ConfigError("unknown manifest key '" + key + "'");
}

TrainingManifest make_manifest(const std::map<std::string, std::string>& overrides) {
  TrainingManifest m;
  for (const auto& [k, v] : overrides) set_manifest_value(m, k, v);
  return m;
}

std::string emit_manifest(const TrainingManifest& m) {
  std::string out = "# GEC model training manifest\n";
  for (const auto& key : manifest_keys()) out += key + " = " + get_value(m, key) + "\n";
  return out;
}

TrainingManifest parse_manifest(const std::string& text) {
  TrainingManifest m;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("manifest line " + std::to_string(lineno) + ": expected key = value");
    std::string key(trim(t.substr(0, eq)));
    std::string value(trim(t.substr(eq + 1)));
    if (!seen.insert(key).second)
      throw ConfigError("manifest line " + std::to_string(lineno) + ": duplicate key '" +
                        key + "'");
    set_manifest_value(m, key, value);
  }
  for (const auto& key : manifest_keys())
    if (!seen.count(key)) throw ConfigError("manifest is missing key '" + key + "'");
  return m;
}

void export_training_pairs(const std::vector<SentencePair>& pairs, PairLayout layout,
                           const fs::path& prefix) {
  if (pairs.empty()) throw InputError("refusing to export an empty pair corpus");
  write_pairs(prefix, layout, pairs);
}

PredictionSet import_predictions(const fs::path& source_file, const fs::path& hypothesis_file,
                                 const std::string& model_tag,
                                 const std::optional<fs::path>& id_file) {
  auto src = read_lines(source_file);
  auto hyp = read_lines(hypothesis_file);
  if (src.size() != hyp.size())
    throw AlignmentError("line-count mismatch: " + source_file.string() + " has " +
                         std::to_string(src.size()) + " lines, " + hypothesis_file.string() +
                         " has " + std::to_string(hyp.size()));
  std::vector<std::string> ids;
  if (id_file) {
    ids = read_lines(*id_file);
    if (ids.size() != src.size())
      throw AlignmentError("line-count mismatch: " + id_file->string() + " has " +
                           std::to_string(ids.size()) + " ids for " +
                           std::to_string(src.size()) + " pairs");
  }
  PredictionSet set;
  set.model_tag = model_tag;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < src.size(); ++i) {
    std::string id = id_file ? std::string(trim(ids[i])) : std::to_string(i + 1);
    if (!seen.insert(id).second)
      throw ValidationError("duplicate prediction id '" + id + "'");
    Prediction p{id, split_tokens(src[i]), split_tokens(hyp[i])};
    if (p.hypothesis.empty() || p.source.empty()) {
      set.warnings.push_back("line " + std::to_string(i + 1) + " (id '" + id + "'): empty " +
                             (p.source.empty() ? "source" : "hypothesis") + ", pair dropped");
      ++set.dropped_empty;
      continue;
    }
    set.pairs.push_back(std::move(p));
  }
  return set;
}

PredictionSet replay_corrector(const std::vector<corruptor::CorruptionRecord>& records,
                               const std::vector<ingest::SentenceRecord>& originals) {
  std::map<std::string, const ingest::SentenceRecord*> by_id;
  for (const auto& s : originals) by_id[s.id] = &s;
  PredictionSet set;
  set.model_tag = "replay-corrector";
  std::vector<std::string> missing;
  for (const auto& r : records) {
    auto it = by_id.find(r.source_id);
    if (it == by_id.end()) {
      missing.push_back(r.source_id);
      continue;
    }
    const auto& original = it->second->tokens;
    set.pairs.push_back({r.source_id, corruptor::replay(original, r.ops), original});
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw LoadError("corruption records reference unknown sentence ids: " + list);
  }
  return set;
}

void write_predictions(const fs::path& path, const PredictionSet& predictions) {
  std::vector<Json> out;
  for (const auto& p : predictions.pairs)
    out.push_back({{"id", p.id},
                   {"source", p.source},
                   {"hypothesis", p.hypothesis},
                   {"model_tag", predictions.model_tag}});
  write_jsonl(path, out);
}

PredictionSet read_predictions(const fs::path& path) {
  PredictionSet set;
  std::set<std::string> seen;
  for (const auto& j : read_jsonl(path)) {
    Prediction p{j.at("id").get<std::string>(), j.at("source").get<TokenSeq>(),
                 j.at("hypothesis").get<TokenSeq>()};
    if (!seen.insert(p.id).second)
      throw ValidationError(path.string() + ": duplicate prediction id '" + p.id + "'");
    set.model_tag = j.value("model_tag", std::string{});
    set.pairs.push_back(std::move(p));
  }
  return set;
}

CandidateSet extract_candidates(const PredictionSet& predictions, std::size_t workers) {
  std::vector<std::size_t> changed;
  for (std::size_t i = 0; i < predictions.pairs.size(); ++i)
    if (predictions.pairs[i].source != predictions.pairs[i].hypothesis) changed.push_back(i);

  CandidateSet set;
  set.pairs.resize(changed.size());
  parallel_for(changed.size(), workers, [&](std::size_t k) {
    const auto& p = predictions.pairs[changed[k]];
    auto [category, alignment] = aligner::classify_pair(p.source, p.hypothesis);
    set.pairs[k] = {p.id, p.source, p.hypothesis, category, std::move(alignment)};
  });

  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& c : set.pairs) {
    ++set.category_counts[c.category];
    if (!seen.insert({join_tokens(c.source), join_tokens(c.hypothesis)}).second)
      ++set.duplicate_pairs;
  }
  return set;
}

Json to_json(const Candidate& c) {
  return {{"id", c.id},
          {"source", c.source},
          {"hypothesis", c.hypothesis},
          {"category", aligner::to_string(c.category)},
          {"alignment", aligner::to_json(c.alignment)}};
}

Candidate candidate_from_json(const Json& j) {
  Candidate c;
  c.id = j.at("id").get<std::string>();
  c.source = j.at("source").get<TokenSeq>();
  c.hypothesis = j.at("hypothesis").get<TokenSeq>();
  c.category = aligner::parse_category(j.at("category").get<std::string>());
  c.alignment = aligner::alignment_from_json(j.at("alignment"));
  return c;
}

void write_candidates(const fs::path& path, const CandidateSet& candidates) {
  std::vector<Json> out;
  for (const auto& c : candidates.pairs) out.push_back(to_json(c));
  write_jsonl(path, out);
}

CandidateSet read_candidates(const fs::path& path) {
  CandidateSet set;
  std::set<std::pair<std::string, std::string>> seen;
  std::set<std::string> ids;
  for (const auto& j : read_jsonl(path)) {
    Candidate c;
    try {
      c = candidate_from_json(j);
    } catch (const Json::exception& e) {
      throw FormatError(path.string() + ": malformed candidate: " + e.what());
    }
    if (!ids.insert(c.id).second)
      throw ValidationError(path.string() + ": duplicate candidate id '" + c.id + "'");
    ++set.category_counts[c.category];
    if (!seen.insert({join_tokens(c.source), join_tokens(c.hypothesis)}).second)
      ++set.duplicate_pairs;
    set.pairs.push_back(std::move(c));
  }
  return set;
}

std::string render_classification(const CandidateSet& candidates) {
  std::string out = "id\tcategory\tdistance\tops\n";
  for (const auto& c : candidates.pairs)
    out += c.id + "\t" + aligner::to_string(c.category) + "\t" +
           std::to_string(c.alignment.distance) + "\t" + aligner::op_summary(c.alignment) +
           "\n";
  out += "# category\tcount\n";
  std::size_t total = 0;
  for (auto cat : aligner::kAllCategories) {
    auto it = candidates.category_counts.find(cat);
    std::size_t n = it == candidates.category_counts.end() ? 0 : it->second;
    total += n;
    out += "# " + aligner::to_string(cat) + "\t" + std::to_string(n) + "\n";
  }
  out += "# total\t" + std::to_string(total) + "\n";
  out += "# duplicate_pairs\t" + std::to_string(candidates.duplicate_pairs) + "\n";
  return out;
}

}  // namespace gecforge::model_bridge
