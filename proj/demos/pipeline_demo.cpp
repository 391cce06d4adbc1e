// Runs the whole pipeline in memory on a small synthetic Indonesian corpus:
// ingest, corruption, a replayed corrector, classification, sampling, a
// scripted annotator, retention, and a scripted LLM judge.
//
//   pipeline_demo [work-dir]

#include <filesystem>
#include <iostream>
#include <sstream>

#include "gecforge/annotation.hpp"
#include "gecforge/corruptor.hpp"
#include "gecforge/ingest.hpp"
#include "gecforge/llm_judge.hpp"
#include "gecforge/model_bridge.hpp"
#include "gecforge/random.hpp"
#include "gecforge/selector.hpp"

namespace fs = std::filesystem;
using namespace gecforge;

namespace {

const std::vector<std::string> kSubjects = {"Saya", "Dia", "Mereka", "Kami", "Ibu", "Ayah", "Guru itu"};
const std::vector<std::string> kVerbs = {"membaca", "menulis", "membeli", "membawa", "melihat",
                                         "mencari", "memasak", "menjual"};
const std::vector<std::string> kObjects = {"buku baru", "surat panjang", "sayur segar",
                                           "tas merah", "rumah besar", "kue manis", "koran pagi"};
const std::vector<std::string> kTails = {
    "di pasar dekat rumah kami setiap hari Minggu",
    "bersama teman lama dari kampung halaman",
    "sebelum matahari terbenam di ufuk barat",
    "karena harga di toko itu sedang turun",
    "untuk keluarga besar yang akan datang besok",
    "dengan hati-hati supaya tidak ada yang rusak",
};

std::string pick(Rng& rng, const std::vector<std::string>& from) {
  return from[rng.below(from.size())];
}

std::vector<ingest::Document> synthetic_documents(std::size_t n_docs, std::size_t per_doc) {
  Rng rng(7);
  std::vector<ingest::Document> docs;
  for (std::size_t d = 0; d < n_docs; ++d) {
    std::string text;
    for (std::size_t s = 0; s < per_doc; ++s) {
      text += pick(rng, kSubjects) + " " + pick(rng, kVerbs) + " " + pick(rng, kObjects) + " " +
              pick(rng, kTails);
      if (rng.below(2)) text += " , lalu " + pick(rng, kVerbs) + " " + pick(rng, kObjects);
      text += ". ";
    }
    docs.push_back({"berita" + std::to_string(d + 1), text});
  }
  return docs;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "gecforge-demo";
  fs::create_directories(work);

  ingest::IngestOptions ingest_opts;
  ingest_opts.abbreviations = ingest::AbbreviationList::indonesian_default();
  auto corpus = ingest::ingest_documents(synthetic_documents(30, 40), ingest_opts);
  std::cout << "ingest: " << corpus.segmented << " sentences, " << corpus.sentences.size()
            << " kept (" << corpus.dropped_length << " outside 10..50 tokens)\n";

  // Light rates keep most pairs within three edits.
  corruptor::CorruptionConfig cfg{0.03, 0.03, 0.03, 0.0, 2024};
  auto corrupted = corruptor::corrupt_corpus(corpus.sentences, cfg, 2);
  std::cout << "corrupt: " << corrupted.pairs.size() << " pairs\n";

  // No trained model in the demo: replay the exact inverse of each corruption.
  auto predictions = model_bridge::replay_corrector(corrupted.records, corpus.sentences);
  auto candidates = model_bridge::extract_candidates(predictions, 2);
  std::istringstream table(model_bridge::render_classification(candidates));
  std::cout << "\n";
  for (std::string line; std::getline(table, line);)
    if (line.starts_with("#")) std::cout << line << "\n";

  auto sample = selector::stratified_sample(candidates, 5, 99);
  std::cout << "\n" << selector::render_manifest_table(sample);

  annotation::AnnotationStore store(annotation::load_tasks(sample, candidates), {"annotator1"}, {},
                                    work / "judgments.ndjson");
  Rng coin(5);
  while (auto item = store.next_item("annotator1")) {
    const bool accurate = coin.uniform() < 0.9;
    store.submit_judgment({item->item_id, "annotator1",
                           accurate ? CorrectionLabel::Accurate : CorrectionLabel::Inaccurate,
                           coin.uniform() < 0.2 ? ResidualLabel::HasErrors : ResidualLabel::NoErrors,
                           ""});
  }
  auto labels = store.finalize();
  auto gold = selector::retention_filter(labels, candidates);
  std::cout << "\n" << selector::render_stats(selector::corpus_stats(gold));

  auto [eval, report] = judge::build_eval_set(labels, candidates, 5, 3, "id");
  std::cout << "\n" << judge::render_label_distribution(report, "id");

  // Answers yes to everything.
  judge::ScriptedJudge optimist("scripted", "optimist",
                                [](const std::string&, const judge::QueryContext&) {
                                  return std::string("Yes");
                                });
  auto rows = judge::run_benchmark(eval,
                                   {judge::builtin_template("closed-en-1"),
                                    judge::builtin_template("closed-en-2")},
                                   {&optimist}, nullptr);
  std::cout << "\n" << judge::render_benchmark(rows);
  std::cout << "\njudgment log: " << (work / "judgments.ndjson").string() << "\n";
}
