#pragma once

#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gecforge/random.hpp"
#include "gecforge/tokens.hpp"

namespace gecforge::testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "gecforge-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

/// A generated document whose sentence boundaries and tokenization are
/// known by construction.
struct FixtureDocument {
  std::string doc_id;
  std::string text;
  std::vector<TokenSeq> sentences;
};

inline const std::vector<std::string>& fixture_words() {
  static const std::vector<std::string> words = {
      "saya",   "kamu",    "dia",     "kami",    "mereka",  "makan",  "minum",   "pergi",
      "datang", "rumah",   "sekolah", "pasar",   "buku",    "meja",   "kursi",   "besar",
      "kecil",  "baru",    "lama",    "cepat",   "lambat",  "dengan", "untuk",   "dari",
      "ke",     "di",      "yang",    "ini",     "itu",     "akan",   "sudah",   "belum",
      "jalan",  "kota",    "desa",    "air",     "nasi",    "kopi",   "teh",     "hari",
      "malam",  "pagi",    "siang",   "orang",   "anak",    "guru",   "murid",   "kerja",
      "bermain", "membaca", "menulis", "melihat", "mendengar", "baik", "buruk",  "tinggi",
      "rendah", "jauh",    "dekat",   "banyak",  "sedikit", "semua",  "setiap",  "beberapa"};
  return words;
}

inline const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names = {"Budi", "Siti", "Andi", "Dewi", "Rina",
                                                 "Agus", "Joko", "Sari", "Wati", "Hadi"};
  return names;
}

/// Sentences of n_min..n_max tokens. Some carry an abbreviation followed by
/// a capitalized name, some a comma; every sentence ends in . ! or ?.
inline std::vector<FixtureDocument> generate_documents(std::size_t n_docs,
                                                       std::size_t sentences_per_doc,
                                                       std::uint64_t seed,
                                                       std::size_t n_min = 4,
                                                       std::size_t n_max = 60) {
  Rng rng(seed);
  const auto& words = fixture_words();
  const auto& names = fixture_names();
  const std::vector<std::string> abbrevs = {"Dr.", "Prof.", "Jl.", "No."};
  const std::vector<std::string> enders = {".", ".", ".", "!", "?"};
  std::vector<FixtureDocument> docs;
  for (std::size_t d = 0; d < n_docs; ++d) {
    FixtureDocument doc;
    doc.doc_id = "doc" + std::to_string(1000 + d);
    for (std::size_t s = 0; s < sentences_per_doc; ++s) {
      const std::size_t target = n_min + rng.below(n_max - n_min + 1);
      TokenSeq tokens;
      std::string text;
      auto add = [&](const std::string& token, bool glue) {
        if (!text.empty() && !glue) text += ' ';
        text += token;
        tokens.push_back(token);
      };
      // target counts the final punctuation token
      while (tokens.size() + 1 < target) {
        const double u = rng.uniform();
        const std::size_t room = target - 1 - tokens.size();
        if (u < 0.05 && room >= 2 && !tokens.empty()) {
          add(abbrevs[rng.below(abbrevs.size())], false);
          add(names[rng.below(names.size())], false);
        } else if (u < 0.12 && room >= 2 && !tokens.empty()) {
          add(words[rng.below(words.size())], false);
          add(",", true);
        } else {
          std::string w = words[rng.below(words.size())];
          if (tokens.empty()) w[0] = static_cast<char>(std::toupper(w[0]));
          add(w, false);
        }
      }
      if (tokens.empty()) {
        std::string w = words[rng.below(words.size())];
        w[0] = static_cast<char>(std::toupper(w[0]));
        add(w, false);
      }
      add(enders[rng.below(enders.size())], true);
      if (!doc.text.empty()) doc.text += ' ';
      doc.text += text;
      doc.sentences.push_back(std::move(tokens));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

inline void write_documents(const fs::path& dir, const std::vector<FixtureDocument>& docs) {
  fs::create_directories(dir);
  for (const auto& d : docs) spit(dir / (d.doc_id + ".txt"), d.text);
}

/// Quotes for /bin/sh.
inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

struct ProcessResult {
  int status = -1;
  std::string out, err;
};

/// Runs argv with stdout/stderr captured through files in `scratch`.
inline ProcessResult run_process(const std::vector<std::string>& argv, const fs::path& scratch) {
  static int counter = 0;
  const auto out_path = scratch / ("proc-" + std::to_string(++counter) + ".out");
  const auto err_path = scratch / ("proc-" + std::to_string(counter) + ".err");
  std::string cmd;
  for (const auto& a : argv) cmd += shell_quote(a) + " ";
  cmd += ">" + shell_quote(out_path.string()) + " 2>" + shell_quote(err_path.string());
  const int raw = std::system(cmd.c_str());
  ProcessResult r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

/// fork + exec without waiting; stdout/stderr go to `log`.
inline pid_t spawn_process(const std::vector<std::string>& argv, const fs::path& log) {
  pid_t pid = fork();
  if (pid == 0) {
    FILE* f = std::freopen(log.c_str(), "a", stdout);
    if (f) dup2(fileno(stdout), STDERR_FILENO);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execv(args[0], args.data());
    _exit(127);
  }
  return pid;
}

inline int wait_process(pid_t pid) {
  int raw = 0;
  waitpid(pid, &raw, 0);
  if (WIFEXITED(raw)) return WEXITSTATUS(raw);
  if (WIFSIGNALED(raw)) return 128 + WTERMSIG(raw);
  return -1;
}

/// Polls until the file exists with non-empty content.
inline std::string wait_for_file(const fs::path& path, std::chrono::milliseconds limit) {
  const auto deadline = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < deadline) {
    if (fs::exists(path)) {
      auto s = slurp(path);
      if (!s.empty() && s.back() == '\n') return s;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return {};
}

}  // namespace gecforge::testing
