#include "gecforge/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "gecforge/error.hpp"
#include "gecforge/io.hpp"
#include "gecforge/parallel.hpp"
#include "gecforge/random.hpp"

namespace gecforge::ingest {

namespace fs = std::filesystem;

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closing(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

bool is_detachable(char c) {
  static constexpr std::string_view kPunct = ".,!?;:\"'()[]%";
  return kPunct.find(c) != std::string_view::npos;
}

// Uppercase ASCII, digit, or an opening quote/bracket (ASCII or UTF-8
// curly quotes) may start a sentence.
bool starts_sentence(std::string_view rest) {
  if (rest.empty()) return false;
  unsigned char c = static_cast<unsigned char>(rest[0]);
  if (std::isupper(c) || std::isdigit(c)) return true;
  if (c == '"' || c == '\'' || c == '(' || c == '[') return true;
  return rest.starts_with("\xE2\x80\x9C") || rest.starts_with("\xE2\x80\x98");
}

}  // namespace

AbbreviationList::AbbreviationList(const std::vector<std::string>& entries) {
  for (const auto& e : entries) add(e);
}

void AbbreviationList::add(std::string_view entry) {
  auto t = trim(entry);
  if (!t.empty()) entries_.insert(lowercase(t));
}

bool AbbreviationList::contains(std::string_view word) const {
  return entries_.count(lowercase(word)) > 0;
}

AbbreviationList AbbreviationList::indonesian_default() {
  return AbbreviationList({
      "No.",   "Nomor.", "Dr.",   "Drs.",  "Dra.",  "Prof.", "Ir.",  "H.",
      "Hj.",   "St.",    "Jl.",   "Jln.",  "Bpk.",  "Sdr.",  "Sdri.", "Tn.",
      "Ny.",   "Nn.",    "dll.",  "dsb.",  "dst.",  "dkk.",  "tsb.", "yth.",
      "a.n.",  "u.p.",   "s.d.",  "Rp.",   "Kab.",  "Kec.",  "Kel.", "Prov.",
      "Tbk.",  "PT.",    "CV.",   "Kol.",  "Jend.", "Brigjen.", "Mayjen.",
      "Letjen.", "Kapt.", "Pol.", "Kompol.", "AKBP.", "hlm.", "Telp.", "Mr.",
      "Mrs.",  "Ms.",    "vs.",   "S.H.",  "S.E.",  "M.Si.", "M.Sc.",
  });
}

AbbreviationList AbbreviationList::load(const fs::path& path) {
  AbbreviationList list;
  for (const auto& line : read_lines(path)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    list.add(t);
  }
  return list;
}

std::vector<std::string> segment_sentences(std::string_view text,
                                           const AbbreviationList& abbreviations) {
  std::vector<std::string> out;
  const std::size_t n = text.size();
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < n) {
    if (!is_terminator(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && is_terminator(text[j])) ++j;
    std::size_t k = j;
    while (k < n && is_closing(text[k])) ++k;
    if (k < n && is_space(text[k])) {
      std::size_t m = k;
      while (m < n && is_space(text[m])) ++m;
      if (starts_sentence(text.substr(m))) {
        std::size_t w = i;
        while (w > start && !is_space(text[w - 1])) --w;
        std::string_view word = text.substr(w, j - w);
        while (!word.empty() &&
               (word.front() == '"' || word.front() == '\'' ||
                word.front() == '(' || word.front() == '['))
          word.remove_prefix(1);
        if (!abbreviations.contains(word)) {
          auto sentence = trim(text.substr(start, k - start));
          if (!sentence.empty()) out.emplace_back(sentence);
          start = m;
        }
      }
    }
    i = j;
  }
  auto tail = trim(text.substr(std::min(start, n)));
  if (!tail.empty()) out.emplace_back(tail);
  return out;
}

TokenSeq tokenize(std::string_view sentence, const AbbreviationList* abbreviations) {
  TokenSeq tokens;
  std::size_t i = 0;
  const std::size_t n = sentence.size();
  while (i < n) {
    while (i < n && is_space(sentence[i])) ++i;
    std::size_t e = i;
    while (e < n && !is_space(sentence[e])) ++e;
    if (e == i) break;
    std::string_view chunk = sentence.substr(i, e - i);
    i = e;

    while (!chunk.empty() && is_detachable(chunk.front())) {
      tokens.emplace_back(1, chunk.front());
      chunk.remove_prefix(1);
    }
    std::vector<Token> trailing;
    while (!chunk.empty() && is_detachable(chunk.back())) {
      if (abbreviations && chunk.back() == '.' && abbreviations->contains(chunk)) break;
      trailing.emplace_back(1, chunk.back());
      chunk.remove_suffix(1);
    }
    if (!chunk.empty()) tokens.emplace_back(chunk);
    tokens.insert(tokens.end(), trailing.rbegin(), trailing.rend());
  }
  return tokens;
}

std::vector<SentenceRecord> filter_by_length(
    const std::vector<SentenceRecord>& sentences, std::size_t min_len,
    std::size_t max_len) {
  if (min_len < 1 || max_len < min_len)
    throw ConfigError("invalid length bounds: min_len=" + std::to_string(min_len) +
                      ", max_len=" + std::to_string(max_len) +
                      " (need 1 <= min_len <= max_len)");
  std::vector<SentenceRecord> out;
  for (const auto& s : sentences)
    if (s.tokens.size() >= min_len && s.tokens.size() <= max_len) out.push_back(s);
  return out;
}

void sort_canonical(std::vector<SentenceRecord>& sentences) {
  std::stable_sort(sentences.begin(), sentences.end(),
                   [](const SentenceRecord& a, const SentenceRecord& b) {
                     if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
                     return a.index_in_doc < b.index_in_doc;
                   });
}

CorpusSplit split_corpus(const std::vector<SentenceRecord>& sentences,
                         std::size_t n_validation, std::size_t n_test,
                         std::uint64_t seed) {
  if (sentences.size() < n_validation + n_test)
    throw SizingError("corpus too small to split: have " +
                      std::to_string(sentences.size()) + " sentences, need at least " +
                      std::to_string(n_validation + n_test) + " (n_validation=" +
                      std::to_string(n_validation) + " + n_test=" +
                      std::to_string(n_test) + ")");
  std::vector<SentenceRecord> ordered = sentences;
  sort_canonical(ordered);

  Rng rng(seed);
  auto order = shuffled_indices(ordered.size(), rng);
  std::vector<int> part(ordered.size(), 0);
  for (std::size_t k = 0; k < n_validation; ++k) part[order[k]] = 1;
  for (std::size_t k = n_validation; k < n_validation + n_test; ++k) part[order[k]] = 2;

  CorpusSplit split;
  split.seed = seed;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    auto& dst = part[i] == 0 ? split.train : part[i] == 1 ? split.validation : split.test;
    dst.push_back(std::move(ordered[i]));
  }
  return split;
}

LengthHistogram length_histogram(const std::vector<SentenceRecord>& sentences) {
  LengthHistogram h;
  for (const auto& s : sentences) ++h[s.tokens.size()];
  return h;
}

std::string sentence_id(std::string_view doc_id, std::size_t index_in_doc) {
  return std::string(doc_id) + "#" + std::to_string(index_in_doc);
}

IngestResult ingest_documents(const std::vector<Document>& documents,
                              const IngestOptions& options) {
  std::vector<std::vector<SentenceRecord>> per_doc(documents.size());
  parallel_for(documents.size(), options.workers, [&](std::size_t d) {
    const auto& doc = documents[d];
    auto raws = segment_sentences(doc.text, options.abbreviations);
    auto& out = per_doc[d];
    out.reserve(raws.size());
    for (std::size_t k = 0; k < raws.size(); ++k) {
      SentenceRecord rec;
      rec.doc_id = doc.doc_id;
      rec.index_in_doc = k;
      rec.id = sentence_id(doc.doc_id, k);
      rec.tokens = tokenize(raws[k], &options.abbreviations);
      rec.raw = std::move(raws[k]);
      if (!rec.tokens.empty()) out.push_back(std::move(rec));
    }
  });

  IngestResult result;
  result.documents = documents.size();
  std::vector<SentenceRecord> all;
  for (auto& v : per_doc)
    for (auto& s : v) all.push_back(std::move(s));
  sort_canonical(all);
  result.segmented = all.size();

  auto kept = filter_by_length(all, options.min_len, options.max_len);
  result.dropped_length = all.size() - kept.size();

  if (options.drop_exact_duplicates) {
    std::unordered_set<std::string> seen;
    std::vector<SentenceRecord> unique;
    for (auto& s : kept) {
      if (seen.insert(join_tokens(s.tokens)).second)
        unique.push_back(std::move(s));
      else
        ++result.dropped_duplicates;
    }
    kept = std::move(unique);
  }
  result.sentences = std::move(kept);
  return result;
}

std::vector<Document> read_documents(const std::vector<fs::path>& paths) {
  std::vector<Document> docs;
  std::set<std::string> ids;
  for (const auto& p : paths) {
    Document d{p.stem().string(), read_file(p)};
    if (!ids.insert(d.doc_id).second)
      throw InputError("duplicate document id '" + d.doc_id + "' (from " +
                       p.string() + "); document file stems must be unique");
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<Document> read_manifest(const fs::path& path) {
  std::vector<Document> docs;
  auto lines = read_lines(path);
  const std::string stem = path.stem().string();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    docs.push_back({stem + ":" + std::to_string(i + 1), lines[i]});
  }
  return docs;
}

void write_corpus(const fs::path& corpus_path, const fs::path& meta_path,
                  const std::vector<SentenceRecord>& sentences) {
  std::vector<std::string> lines;
  std::vector<Json> meta;
  lines.reserve(sentences.size());
  meta.reserve(sentences.size());
  for (const auto& s : sentences) {
    lines.push_back(join_tokens(s.tokens));
    meta.push_back({{"id", s.id}, {"doc_id", s.doc_id}, {"index", s.index_in_doc},
                    {"raw", s.raw}});
  }
  write_lines(corpus_path, lines);
  write_jsonl(meta_path, meta);
}

std::vector<SentenceRecord> read_corpus(const fs::path& corpus_path,
                                        const fs::path& meta_path) {
  auto lines = read_lines(corpus_path);
  auto meta = read_jsonl(meta_path);
  if (lines.size() != meta.size())
    throw FormatError("corpus/sidecar line count mismatch: " + corpus_path.string() +
                      " has " + std::to_string(lines.size()) + ", " +
                      meta_path.string() + " has " + std::to_string(meta.size()));
  std::vector<SentenceRecord> out;
  out.reserve(lines.size());
  std::set<std::string> ids;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    SentenceRecord r;
    try {
      r.id = meta[i].at("id").get<std::string>();
      r.doc_id = meta[i].at("doc_id").get<std::string>();
      r.index_in_doc = meta[i].at("index").get<std::size_t>();
      r.raw = meta[i].value("raw", std::string{});
    } catch (const Json::exception& e) {
      throw FormatError(meta_path.string() + ":" + std::to_string(i + 1) + ": " + e.what());
    }
    r.tokens = split_tokens(lines[i]);
    if (r.tokens.empty())
      throw FormatError(corpus_path.string() + ":" + std::to_string(i + 1) +
                        ": empty sentence");
    if (!ids.insert(r.id).second)
      throw FormatError(meta_path.string() + ": duplicate sentence id '" + r.id + "'");
    out.push_back(std::move(r));
  }
  return out;
}

std::string render_histogram(const LengthHistogram& histogram) {
  std::string out = "length\tcount\n";
  for (const auto& [len, count] : histogram)
    out += std::to_string(len) + "\t" + std::to_string(count) + "\n";
  return out;
}

void write_split(const fs::path& path, const CorpusSplit& split) {
  std::vector<SentenceRecord> all;
  std::map<std::string, std::string> part;
  for (const auto& s : split.train) part[s.id] = "train", all.push_back(s);
  for (const auto& s : split.validation) part[s.id] = "validation", all.push_back(s);
  for (const auto& s : split.test) part[s.id] = "test", all.push_back(s);
  sort_canonical(all);
  std::vector<Json> records;
  for (const auto& s : all) records.push_back({{"id", s.id}, {"part", part[s.id]}});
  write_jsonl(path, records);
}

std::map<std::string, std::string> read_split(const fs::path& path) {
  std::map<std::string, std::string> out;
  for (const auto& r : read_jsonl(path)) {
    auto part = r.at("part").get<std::string>();
    if (part != "train" && part != "validation" && part != "test")
      throw FormatError(path.string() + ": unknown split part '" + part + "'");
    out[r.at("id").get<std::string>()] = part;
  }
  return out;
}

}  // namespace gecforge::ingest
