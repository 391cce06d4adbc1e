#include "gecforge/pairs.hpp"

#include "gecforge/error.hpp"
#include "gecforge/io.hpp"

namespace gecforge {

namespace fs = std::filesystem;

PairLayout parse_pair_layout(const std::string& name) {
  if (name == "twin" || name == "twin-files") return PairLayout::TwinFiles;
  if (name == "tsv" || name == "tab-separated") return PairLayout::TabSeparated;
  throw ConfigError("unknown pair layout '" + name + "' (expected twin or tsv)");
}

std::string to_string(PairLayout layout) {
  return layout == PairLayout::TwinFiles ? "twin" : "tsv";
}

std::vector<fs::path> pair_paths(const fs::path& prefix, PairLayout layout) {
  auto with = [&](const char* ext) {
    fs::path p = prefix;
    p += ext;
    return p;
  };
  if (layout == PairLayout::TwinFiles) return {with(".src"), with(".tgt")};
  return {with(".tsv")};
}

namespace {

void check_tokens(const SentencePair& pair, std::size_t line, PairLayout layout) {
  for (const auto* seq : {&pair.source, &pair.target}) {
    for (const auto& tok : *seq) {
      if (layout == PairLayout::TabSeparated && tok.find('\t') != std::string::npos)
        throw FormatError("pair " + std::to_string(line) + " (id '" + pair.id +
                          "') contains a tab character; not representable in "
                          "tab-separated layout");
      if (tok.empty())
        throw FormatError("pair " + std::to_string(line) + " (id '" + pair.id +
                          "') contains an empty token");
      for (char c : tok)
        if (is_space(c))
          throw FormatError("pair " + std::to_string(line) + " (id '" + pair.id +
                            "') has a token containing whitespace");
    }
  }
}

}  // namespace

void write_pairs(const fs::path& prefix, PairLayout layout,
                 const std::vector<SentencePair>& pairs) {
  for (std::size_t i = 0; i < pairs.size(); ++i) check_tokens(pairs[i], i + 1, layout);
  auto paths = pair_paths(prefix, layout);
  if (layout == PairLayout::TwinFiles) {
    std::vector<std::string> src, tgt;
    for (const auto& p : pairs) {
      src.push_back(join_tokens(p.source));
      tgt.push_back(join_tokens(p.target));
    }
    write_lines(paths[0], src);
    write_lines(paths[1], tgt);
  } else {
    std::vector<std::string> lines;
    for (const auto& p : pairs)
      lines.push_back(join_tokens(p.source) + "\t" + join_tokens(p.target));
    write_lines(paths[0], lines);
  }
}

std::vector<SentencePair> read_pairs(const fs::path& prefix, PairLayout layout) {
  auto paths = pair_paths(prefix, layout);
  std::vector<SentencePair> out;
  if (layout == PairLayout::TwinFiles) {
    auto src = read_lines(paths[0]);
    auto tgt = read_lines(paths[1]);
    if (src.size() != tgt.size())
      throw AlignmentError("line-count mismatch: " + paths[0].string() + " has " +
                           std::to_string(src.size()) + " lines, " + paths[1].string() +
                           " has " + std::to_string(tgt.size()));
    for (std::size_t i = 0; i < src.size(); ++i)
      out.push_back({std::to_string(i + 1), split_tokens(src[i]), split_tokens(tgt[i])});
  } else {
    auto lines = read_lines(paths[0]);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      auto fields = split_fields(lines[i], '\t');
      if (fields.size() != 2)
        throw FormatError(paths[0].string() + ":" + std::to_string(i + 1) +
                          ": expected 2 tab-separated fields, got " +
                          std::to_string(fields.size()));
      out.push_back({std::to_string(i + 1), split_tokens(fields[0]), split_tokens(fields[1])});
    }
  }
  return out;
}

}  // namespace gecforge
