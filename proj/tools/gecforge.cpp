// gecforge: command-line driver for every pipeline stage.

#include <csignal>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include "CLI11.hpp"

#include "gecforge/aligner.hpp"
#include "gecforge/annotation.hpp"
#include "gecforge/annotation_server.hpp"
#include "gecforge/corruptor.hpp"
#include "gecforge/error.hpp"
#include "gecforge/ingest.hpp"
#include "gecforge/io.hpp"
#include "gecforge/llm_judge.hpp"
#include "gecforge/model_bridge.hpp"
#include "gecforge/pairs.hpp"
#include "gecforge/pipeline_config.hpp"
#include "gecforge/selector.hpp"

namespace fs = std::filesystem;
using namespace gecforge;

namespace {

struct Globals {
  std::string config_path;
  std::string run_record = "gecforge-runs.jsonl";
  PipelineConfig config;
};

// Flag value if given, else config value, else fallback.
template <typename T>
T pick(const std::optional<T>& flag, T from_config) {
  return flag ? *flag : from_config;
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& flag, const PipelineConfig& cfg,
                           const std::string& section, RunRecord& record,
                           const std::string& seed_name = "seed") {
  std::optional<std::uint64_t> seed = flag ? flag : cfg.get_seed(section, seed_name);
  if (!seed)
    throw UsageError(record.command + " needs an explicit seed: pass --" + seed_name +
                     " or set [" + section + "] " + seed_name + " in the config file");
  record.seeds[section + "." + seed_name] = *seed;
  return *seed;
}

void emit(const std::string& text, const std::string& path, RunRecord& record) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
    record.outputs.emplace_back(path);
  }
}

std::set<std::string> parse_annotators(const std::vector<std::string>& list) {
  std::set<std::string> out;
  for (const auto& entry : list)
    for (const auto& f : split_fields(entry, ',')) {
      std::string id(trim(f));
      if (!id.empty()) out.insert(id);
    }
  return out;
}

annotation::AdjudicationPolicy resolve_policy(const std::optional<std::string>& mode,
                                              const std::optional<std::size_t>& per_item,
                                              const PipelineConfig& cfg) {
  annotation::AdjudicationPolicy policy;
  policy.mode = annotation::parse_policy_mode(
      pick(mode, cfg.get_string("annotate", "mode", "single")));
  policy.annotators_per_item = pick(per_item, cfg.get_size("annotate", "annotators_per_item", 1));
  policy.validate();
  return policy;
}

// Blocks SIGINT/SIGTERM in every thread and stops the server from a
// dedicated sigwait thread, so no work happens in signal context.
class ShutdownWatcher {
 public:
  explicit ShutdownWatcher(std::function<void()> on_signal) {
    sigemptyset(&set_);
    sigaddset(&set_, SIGINT);
    sigaddset(&set_, SIGTERM);
    sigaddset(&set_, SIGUSR1);
    pthread_sigmask(SIG_BLOCK, &set_, nullptr);
    thread_ = std::thread([this, on_signal = std::move(on_signal)] {
      int sig = 0;
      sigwait(&set_, &sig);
      if (sig != SIGUSR1) on_signal();
    });
  }
  ~ShutdownWatcher() {
    pthread_kill(thread_.native_handle(), SIGUSR1);
    thread_.join();
  }

 private:
  sigset_t set_;
  std::thread thread_;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage:
    case ErrorKind::Config:
      return 2;
    default:
      return 1;
  }
}

std::string hint_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage:
    case ErrorKind::Config:
      return "run 'gecforge <subcommand> --help' for the accepted flags and config keys";
    case ErrorKind::Auth:
      return "check the environment variable named by api_key_env in the endpoint config";
    default:
      return {};
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic GEC data pipeline: ingest, corrupt, classify, sample, annotate, judge."};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "INI-style pipeline config; flags override it")
      ->check(CLI::ExistingFile);
  app.add_option("--run-record", g.run_record, "JSONL file receiving one provenance record per run")
      ->capture_default_str();

  RunRecord record;
  std::function<void()> action;
  auto on = [&](CLI::App* sub, std::function<void()> fn) {
    sub->callback([&, sub, fn = std::move(fn)] {
      record.command = sub->get_name();
      action = fn;
    });
  };

  // ------------------------------------------------------------ ingest
  struct {
    std::vector<std::string> inputs;
    std::string manifest, corpus, meta, histogram, split;
    std::optional<std::size_t> min_len, max_len, validation, test, workers;
    std::optional<std::string> abbreviations;
    std::optional<std::uint64_t> seed;
    bool drop_duplicates = false;
  } ing;
  auto* ingest = app.add_subcommand("ingest", "Segment, tokenize and length-filter raw documents");
  ingest->add_option("--input", ing.inputs, "Document files (one document per file)")
      ->check(CLI::ExistingFile);
  ingest->add_option("--manifest", ing.manifest, "File with one document per line")
      ->check(CLI::ExistingFile);
  ingest->add_option("--out-corpus", ing.corpus, "Tokenized corpus, one sentence per line")
      ->required();
  ingest->add_option("--out-meta", ing.meta, "Sentence metadata JSONL")->required();
  ingest->add_option("--histogram", ing.histogram, "Length histogram TSV (default stdout)");
  ingest->add_option("--split", ing.split, "Also write a train/validation/test split JSONL");
  ingest->add_option("--validation", ing.validation, "Validation size for --split");
  ingest->add_option("--test", ing.test, "Test size for --split");
  ingest->add_option("--seed", ing.seed, "Split seed");
  ingest->add_option("--min-len", ing.min_len, "Minimum tokens per sentence (default 10)");
  ingest->add_option("--max-len", ing.max_len, "Maximum tokens per sentence (default 50)");
  ingest->add_option("--abbreviations", ing.abbreviations, "Abbreviation list file");
  ingest->add_flag("--drop-duplicates", ing.drop_duplicates, "Drop exact duplicate sentences");
  ingest->add_option("--workers", ing.workers, "Worker threads");
  on(ingest, [&] {
    const auto& cfg = g.config;
    if (ing.inputs.empty() == ing.manifest.empty())
      throw UsageError("ingest needs exactly one of --input or --manifest");
    std::vector<ingest::Document> docs;
    if (!ing.manifest.empty()) {
      docs = ingest::read_manifest(ing.manifest);
      record.inputs.emplace_back(ing.manifest);
    } else {
      std::vector<fs::path> paths(ing.inputs.begin(), ing.inputs.end());
      docs = ingest::read_documents(paths);
      record.inputs.insert(record.inputs.end(), paths.begin(), paths.end());
    }
    ingest::IngestOptions opts;
    opts.min_len = pick(ing.min_len, cfg.get_size("ingest", "min_len", ingest::kMinSentenceTokens));
    opts.max_len = pick(ing.max_len, cfg.get_size("ingest", "max_len", ingest::kMaxSentenceTokens));
    opts.workers = pick(ing.workers, cfg.get_size("ingest", "workers", 1));
    opts.drop_exact_duplicates = ing.drop_duplicates || cfg.get_bool("ingest", "drop_duplicates", false);
    if (auto abbr = ing.abbreviations ? ing.abbreviations : cfg.get("ingest", "abbreviations")) {
      opts.abbreviations = ingest::AbbreviationList::load(*abbr);
      record.inputs.emplace_back(*abbr);
    }
    auto result = ingest::ingest_documents(docs, opts);
    ingest::write_corpus(ing.corpus, ing.meta, result.sentences);
    record.outputs.emplace_back(ing.corpus);
    record.outputs.emplace_back(ing.meta);
    emit(ingest::render_histogram(ingest::length_histogram(result.sentences)), ing.histogram,
         record);
    if (!ing.split.empty()) {
      const auto seed = require_seed(ing.seed, cfg, "ingest", record);
      auto split = ingest::split_corpus(
          result.sentences,
          pick(ing.validation, cfg.get_size("ingest", "validation", ingest::kDefaultValidationSize)),
          pick(ing.test, cfg.get_size("ingest", "test", ingest::kDefaultTestSize)), seed);
      ingest::write_split(ing.split, split);
      record.outputs.emplace_back(ing.split);
    }
    std::cerr << "ingest: " << result.documents << " documents, " << result.segmented
              << " sentences segmented, " << result.sentences.size() << " kept, "
              << result.dropped_length << " outside length bounds, " << result.dropped_duplicates
              << " duplicates dropped\n";
  });

  // ------------------------------------------------------------ corrupt
  struct {
    std::string corpus, meta, out, records, report, split, part = "train";
    std::optional<std::string> layout;
    std::optional<double> p_delete, p_add, p_replace, sigma;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
  } cor;
  auto* corrupt = app.add_subcommand("corrupt", "Generate synthetic (corrupted, original) pairs");
  corrupt->add_option("--corpus", cor.corpus, "Tokenized corpus")->required()->check(CLI::ExistingFile);
  corrupt->add_option("--meta", cor.meta, "Sentence metadata JSONL")->required()->check(CLI::ExistingFile);
  corrupt->add_option("--out", cor.out, "Output pair prefix")->required();
  corrupt->add_option("--layout", cor.layout, "Pair layout: twin or tsv (default twin)");
  corrupt->add_option("--records", cor.records, "Corruption record log JSONL")->required();
  corrupt->add_option("--report", cor.report, "Rate report (default stdout)");
  corrupt->add_option("--split", cor.split, "Restrict to one part of a split file")
      ->check(CLI::ExistingFile);
  corrupt->add_option("--part", cor.part, "Split part used with --split")->capture_default_str();
  corrupt->add_option("--p-delete", cor.p_delete, "Deletion probability (default 0.1)");
  corrupt->add_option("--p-add", cor.p_add, "Addition probability (default 0.1)");
  corrupt->add_option("--p-replace", cor.p_replace, "Replacement probability (default 0.1)");
  corrupt->add_option("--sigma", cor.sigma, "Position deviation (default 0.5)");
  corrupt->add_option("--seed", cor.seed, "Corruption seed");
  corrupt->add_option("--workers", cor.workers, "Worker threads");
  on(corrupt, [&] {
    const auto& cfg = g.config;
    corruptor::CorruptionConfig cc;
    cc.p_delete = pick(cor.p_delete, cfg.get_double("corrupt", "p_delete", cc.p_delete));
    cc.p_add = pick(cor.p_add, cfg.get_double("corrupt", "p_add", cc.p_add));
    cc.p_replace = pick(cor.p_replace, cfg.get_double("corrupt", "p_replace", cc.p_replace));
    cc.sigma = pick(cor.sigma, cfg.get_double("corrupt", "sigma", cc.sigma));
    cc.seed = require_seed(cor.seed, cfg, "corrupt", record);
    cc.validate();
    const auto layout = parse_pair_layout(pick(cor.layout, cfg.get_string("corrupt", "layout", "twin")));
    record.inputs = {cor.corpus, cor.meta};
    auto corpus = ingest::read_corpus(cor.corpus, cor.meta);
    if (!cor.split.empty()) {
      record.inputs.emplace_back(cor.split);
      auto parts = ingest::read_split(cor.split);
      std::vector<ingest::SentenceRecord> kept;
      for (auto& s : corpus) {
        auto it = parts.find(s.id);
        if (it != parts.end() && it->second == cor.part) kept.push_back(std::move(s));
      }
      corpus = std::move(kept);
    }
    auto result = corruptor::corrupt_corpus(corpus, cc, pick(cor.workers, cfg.get_size("corrupt", "workers", 1)));
    write_pairs(cor.out, layout, result.pairs);
    for (const auto& p : pair_paths(cor.out, layout)) record.outputs.push_back(p);
    corruptor::write_record_log(cor.records, result.records);
    record.outputs.emplace_back(cor.records);
    emit(corruptor::render_report(cc, result), cor.report, record);
  });

  // ------------------------------------------------------------ export-train
  struct {
    std::string pairs, layout = "twin", out, out_layout = "twin";
  } exp;
  auto* export_train = app.add_subcommand("export-train", "Export pairs in a trainer's layout");
  export_train->add_option("--pairs", exp.pairs, "Input pair prefix")->required();
  export_train->add_option("--layout", exp.layout, "Input layout (twin or tsv)")->capture_default_str();
  export_train->add_option("--out", exp.out, "Output prefix")->required();
  export_train->add_option("--out-layout", exp.out_layout, "Output layout (twin or tsv)")
      ->capture_default_str();
  on(export_train, [&] {
    const auto in_layout = parse_pair_layout(exp.layout);
    const auto out_layout = parse_pair_layout(exp.out_layout);
    for (const auto& p : pair_paths(exp.pairs, in_layout)) record.inputs.push_back(p);
    auto pairs = read_pairs(exp.pairs, in_layout);
    model_bridge::export_training_pairs(pairs, out_layout, exp.out);
    for (const auto& p : pair_paths(exp.out, out_layout)) record.outputs.push_back(p);
  });

  // ------------------------------------------------------------ emit-manifest
  struct {
    std::vector<std::string> overrides;
    std::string out;
  } man;
  auto* emit_manifest = app.add_subcommand("emit-manifest", "Write the training hyperparameter manifest");
  emit_manifest->add_option("--set", man.overrides, "Override as key=value (repeatable)");
  emit_manifest->add_option("--out", man.out, "Manifest file (default stdout)");
  on(emit_manifest, [&] {
    std::map<std::string, std::string> overrides;
    for (const auto& kv : man.overrides) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      overrides[std::string(trim(kv.substr(0, eq)))] = std::string(trim(kv.substr(eq + 1)));
    }
    emit(model_bridge::emit_manifest(model_bridge::make_manifest(overrides)), man.out, record);
  });

  // ------------------------------------------------------------ import-preds
  struct {
    std::string source, hypothesis, ids, model_tag = "model", replay, corpus, meta, out;
  } imp;
  auto* import_preds = app.add_subcommand("import-preds", "Import model predictions (or replay a perfect corrector)");
  import_preds->add_option("--source", imp.source, "Source sentences, one per line");
  import_preds->add_option("--hypothesis", imp.hypothesis, "Model outputs, one per line");
  import_preds->add_option("--ids", imp.ids, "Optional ids, one per line");
  import_preds->add_option("--model-tag", imp.model_tag, "Model tag")->capture_default_str();
  import_preds->add_option("--replay", imp.replay,
                           "Corruption record log; emits the perfect replay corrector");
  import_preds->add_option("--corpus", imp.corpus, "Original corpus (with --replay)");
  import_preds->add_option("--meta", imp.meta, "Original metadata (with --replay)");
  import_preds->add_option("--out", imp.out, "Prediction JSONL")->required();
  on(import_preds, [&] {
    model_bridge::PredictionSet preds;
    if (!imp.replay.empty()) {
      if (imp.corpus.empty() || imp.meta.empty())
        throw UsageError("import-preds --replay also needs --corpus and --meta");
      record.inputs = {imp.replay, imp.corpus, imp.meta};
      preds = model_bridge::replay_corrector(corruptor::read_record_log(imp.replay),
                                             ingest::read_corpus(imp.corpus, imp.meta));
    } else {
      if (imp.source.empty() || imp.hypothesis.empty())
        throw UsageError("import-preds needs --source and --hypothesis (or --replay)");
      record.inputs = {imp.source, imp.hypothesis};
      std::optional<fs::path> ids;
      if (!imp.ids.empty()) {
        ids = imp.ids;
        record.inputs.emplace_back(imp.ids);
      }
      preds = model_bridge::import_predictions(imp.source, imp.hypothesis, imp.model_tag, ids);
    }
    for (const auto& w : preds.warnings) std::cerr << "import-preds: warning: " << w << '\n';
    model_bridge::write_predictions(imp.out, preds);
    record.outputs.emplace_back(imp.out);
  });

  // ------------------------------------------------------------ classify
  struct {
    std::string predictions, out, table;
    std::optional<std::size_t> workers;
  } cls;
  auto* classify = app.add_subcommand("classify", "Align predictions and assign error categories");
  classify->add_option("--predictions", cls.predictions, "Prediction JSONL")->required()->check(CLI::ExistingFile);
  classify->add_option("--out", cls.out, "Candidate JSONL")->required();
  classify->add_option("--table", cls.table, "Classification TSV (default stdout)");
  classify->add_option("--workers", cls.workers, "Worker threads");
  on(classify, [&] {
    record.inputs = {cls.predictions};
    auto candidates = model_bridge::extract_candidates(
        model_bridge::read_predictions(cls.predictions),
        pick(cls.workers, g.config.get_size("classify", "workers", 1)));
    model_bridge::write_candidates(cls.out, candidates);
    record.outputs.emplace_back(cls.out);
    emit(model_bridge::render_classification(candidates), cls.table, record);
  });

  // ------------------------------------------------------------ sample
  struct {
    std::string candidates, out, table;
    std::optional<std::size_t> n;
    std::optional<std::uint64_t> seed;
  } smp;
  auto* sample = app.add_subcommand("sample", "Stratified sample per pure error category");
  sample->add_option("--candidates", smp.candidates, "Candidate JSONL")->required()->check(CLI::ExistingFile);
  sample->add_option("--n", smp.n, "Items per category (default 300)");
  sample->add_option("--seed", smp.seed, "Sampling seed");
  sample->add_option("--out", smp.out, "Sample manifest JSONL")->required();
  sample->add_option("--table", smp.table, "Per-category summary (default stdout)");
  on(sample, [&] {
    const auto seed = require_seed(smp.seed, g.config, "sample", record);
    record.inputs = {smp.candidates};
    auto manifest = selector::stratified_sample(
        model_bridge::read_candidates(smp.candidates),
        pick(smp.n, g.config.get_size("sample", "n_per_category", selector::kDefaultPerCategory)),
        seed);
    selector::write_manifest(smp.out, manifest);
    record.outputs.emplace_back(smp.out);
    emit(selector::render_manifest_table(manifest), smp.table, record);
  });

  // ------------------------------------------------------------ serve
  struct {
    std::string manifest, candidates, log, port_file, ui_dir;
    std::vector<std::string> annotators;
    std::optional<std::string> mode, host;
    std::optional<std::size_t> per_item, lease_minutes;
    std::optional<int> port;
  } srv;
  auto* serve = app.add_subcommand("serve", "Run the annotation service over HTTP");
  serve->add_option("--manifest", srv.manifest, "Sample manifest JSONL")->required()->check(CLI::ExistingFile);
  serve->add_option("--candidates", srv.candidates, "Candidate JSONL")->required()->check(CLI::ExistingFile);
  serve->add_option("--log", srv.log, "Append-only judgment log")->required();
  serve->add_option("--annotators", srv.annotators, "Registered annotator ids (comma separated)");
  serve->add_option("--mode", srv.mode, "Adjudication: single, majority or unanimous");
  serve->add_option("--annotators-per-item", srv.per_item, "Judgments required per item");
  serve->add_option("--lease-minutes", srv.lease_minutes, "Assignment lease (default 30)");
  serve->add_option("--host", srv.host, "Listen address (default 127.0.0.1)");
  serve->add_option("--port", srv.port, "Listen port; 0 picks a free one (default 8080)");
  serve->add_option("--port-file", srv.port_file, "Write the bound port here once listening");
  serve->add_option("--ui-dir", srv.ui_dir, "Static UI directory served at /");
  on(serve, [&] {
    const auto& cfg = g.config;
    auto annotators = parse_annotators(srv.annotators);
    if (annotators.empty()) annotators = parse_annotators(cfg.get_list("annotate", "annotators"));
    if (annotators.empty())
      throw UsageError("serve needs at least one annotator: pass --annotators or set "
                       "[annotate] annotators");
    const auto policy = resolve_policy(srv.mode, srv.per_item, cfg);
    record.inputs = {srv.manifest, srv.candidates};
    auto items = annotation::load_tasks(selector::read_manifest(srv.manifest),
                                        model_bridge::read_candidates(srv.candidates));
    const auto lease = std::chrono::minutes(
        pick(srv.lease_minutes, cfg.get_size("annotate", "lease_minutes", 30)));
    annotation::AnnotationStore store(std::move(items), annotators, policy, srv.log, lease);
    std::optional<fs::path> ui;
    if (!srv.ui_dir.empty()) ui = srv.ui_dir;
    annotation::AnnotationServer server(store, ui);
    ShutdownWatcher watcher([&] { server.stop(); });
    const std::string host = pick(srv.host, cfg.get_string("annotate", "host", "127.0.0.1"));
    const int port = server.bind(
        host, pick(srv.port, static_cast<int>(cfg.get_size("annotate", "port", 8080))));
    if (!srv.port_file.empty()) write_file(srv.port_file, std::to_string(port) + "\n");
    std::cerr << "serve: " << store.progress().total << " items, " << store.replayed_count()
              << " judgments replayed, listening on " << host << ":" << port << '\n';
    server.serve();
    record.outputs.emplace_back(srv.log);
  });

  // ------------------------------------------------------------ finalize
  struct {
    std::string manifest, candidates, log, out, report;
    std::optional<std::string> mode;
    std::optional<std::size_t> per_item;
    bool skip = false;
  } fin;
  auto* finalize = app.add_subcommand("finalize", "Adjudicate the judgment log into final labels");
  finalize->add_option("--manifest", fin.manifest, "Sample manifest JSONL")->required()->check(CLI::ExistingFile);
  finalize->add_option("--candidates", fin.candidates, "Candidate JSONL")->required()->check(CLI::ExistingFile);
  finalize->add_option("--log", fin.log, "Judgment log")->required()->check(CLI::ExistingFile);
  finalize->add_option("--mode", fin.mode, "Adjudication: single, majority or unanimous");
  finalize->add_option("--annotators-per-item", fin.per_item, "Judgments required per item");
  finalize->add_flag("--skip-underpopulated", fin.skip, "Leave out items lacking judgments");
  finalize->add_option("--out", fin.out, "Final label JSONL")->required();
  finalize->add_option("--report", fin.report, "Per-category annotation report (default stdout)");
  on(finalize, [&] {
    const auto policy = resolve_policy(fin.mode, fin.per_item, g.config);
    record.inputs = {fin.manifest, fin.candidates, fin.log};
    auto items = annotation::load_tasks(selector::read_manifest(fin.manifest),
                                        model_bridge::read_candidates(fin.candidates));
    std::vector<annotation::Judgment> judgments;
    for (const auto& j : read_jsonl(fin.log)) judgments.push_back(annotation::judgment_from_json(j));
    auto labels = annotation::finalize_labels(items, judgments, policy, fin.skip);
    write_final_labels(fin.out, labels);
    record.outputs.emplace_back(fin.out);
    emit(selector::render_annotation_report(selector::annotation_report(labels)), fin.report,
         record);
  });

  // ------------------------------------------------------------ retain
  struct {
    std::string labels, candidates, out;
  } ret;
  auto* retain = app.add_subcommand("retain", "Keep items judged accurate with no residual errors");
  retain->add_option("--labels", ret.labels, "Final label JSONL")->required()->check(CLI::ExistingFile);
  retain->add_option("--candidates", ret.candidates, "Candidate JSONL")->required()->check(CLI::ExistingFile);
  retain->add_option("--out", ret.out, "Gold corpus JSONL")->required();
  on(retain, [&] {
    record.inputs = {ret.labels, ret.candidates};
    auto gold = selector::retention_filter(read_final_labels(ret.labels),
                                           model_bridge::read_candidates(ret.candidates));
    selector::write_gold(ret.out, gold);
    record.outputs.emplace_back(ret.out);
    std::cerr << "retain: " << gold.size() << " items kept\n";
  });

  // ------------------------------------------------------------ stats
  struct {
    std::string gold, out, json;
  } sts;
  auto* stats = app.add_subcommand("stats", "Per-category statistics of the gold corpus");
  stats->add_option("--gold", sts.gold, "Gold corpus JSONL")->required()->check(CLI::ExistingFile);
  stats->add_option("--out", sts.out, "Table (default stdout)");
  stats->add_option("--json", sts.json, "Machine-readable JSONL");
  on(stats, [&] {
    record.inputs = {sts.gold};
    auto s = selector::corpus_stats(selector::read_gold(sts.gold));
    emit(selector::render_stats(s), sts.out, record);
    if (!sts.json.empty()) {
      write_jsonl(sts.json, selector::stats_records(s));
      record.outputs.emplace_back(sts.json);
    }
  });

  // ------------------------------------------------------------ build-eval
  struct {
    std::string labels, candidates, out, table;
    std::optional<std::size_t> n;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> language;
  } bev;
  auto* build_eval = app.add_subcommand("build-eval", "Sample the LLM evaluation set from final labels");
  build_eval->add_option("--labels", bev.labels, "Final label JSONL")->required()->check(CLI::ExistingFile);
  build_eval->add_option("--candidates", bev.candidates, "Candidate JSONL")->required()->check(CLI::ExistingFile);
  build_eval->add_option("--n", bev.n, "Items per category (default 100)");
  build_eval->add_option("--seed", bev.seed, "Sampling seed");
  build_eval->add_option("--language", bev.language, "Language tag (default id)");
  build_eval->add_option("--out", bev.out, "Eval set JSONL")->required();
  build_eval->add_option("--table", bev.table, "Label distribution (default stdout)");
  on(build_eval, [&] {
    const auto& cfg = g.config;
    const auto seed = require_seed(bev.seed, cfg, "eval", record);
    const auto language = pick(bev.language, cfg.get_string("eval", "language", "id"));
    record.inputs = {bev.labels, bev.candidates};
    auto [set, report] = judge::build_eval_set(
        read_final_labels(bev.labels), model_bridge::read_candidates(bev.candidates),
        pick(bev.n, cfg.get_size("eval", "n_per_type", judge::kDefaultEvalPerType)), seed,
        language);
    judge::write_eval_set(bev.out, set);
    record.outputs.emplace_back(bev.out);
    emit(judge::render_label_distribution(report, language), bev.table, record);
  });

  // ------------------------------------------------------------ judge
  struct {
    std::string eval, run_log, out, table, replay;
    std::vector<std::string> endpoints, templates, template_files;
    std::optional<double> beta;
  } jdg;
  auto* judge_cmd = app.add_subcommand("judge", "Query LLM judges on the evaluation set");
  judge_cmd->add_option("--eval", jdg.eval, "Eval set JSONL")->required()->check(CLI::ExistingFile);
  judge_cmd->add_option("--endpoint", jdg.endpoints, "Endpoint config file (repeatable)")
      ->check(CLI::ExistingFile);
  judge_cmd->add_option("--replay", jdg.replay,
                        "Answer from a previous run log instead of the network")
      ->check(CLI::ExistingFile);
  judge_cmd->add_option("--template", jdg.templates,
                        "Built-in template name (repeatable; default the four closed templates)");
  judge_cmd->add_option("--template-file", jdg.template_files,
                        "Custom template as PATH:SUBTASK:LANGUAGE (repeatable)");
  judge_cmd->add_option("--beta", jdg.beta, "F-measure beta (default 1)");
  judge_cmd->add_option("--run-log", jdg.run_log, "Per-query JSONL log")->required();
  judge_cmd->add_option("--out", jdg.out, "Benchmark result JSONL")->required();
  judge_cmd->add_option("--table", jdg.table, "Result tables (default stdout)");
  on(judge_cmd, [&] {
    const auto& cfg = g.config;
    if (jdg.endpoints.empty() == jdg.replay.empty())
      throw UsageError("judge needs --endpoint configs or a --replay run log (not both)");
    record.inputs = {jdg.eval};
    const auto eval = judge::read_eval_set(jdg.eval);

    std::vector<judge::PromptTemplate> templates;
    for (const auto& name : jdg.templates) templates.push_back(judge::builtin_template(name));
    for (const auto& spec : jdg.template_files) {
      auto fields = split_fields(spec, ':');
      if (fields.size() != 3 || (fields[1] != "1" && fields[1] != "2"))
        throw UsageError("--template-file expects PATH:SUBTASK:LANGUAGE, got '" + spec + "'");
      templates.push_back(judge::load_template(fields[0], std::stoi(fields[1]), fields[2]));
      record.inputs.emplace_back(fields[0]);
    }
    if (templates.empty())
      for (const char* name : {"closed-en-1", "closed-id-1", "closed-en-2", "closed-id-2"})
        templates.push_back(judge::builtin_template(name));

    std::vector<std::unique_ptr<judge::Judge>> owned;
    if (!jdg.replay.empty()) {
      record.inputs.emplace_back(jdg.replay);
      const auto log = read_jsonl(jdg.replay);
      for (const auto& [endpoint, model] : judge::run_log_endpoints(log))
        owned.push_back(std::make_unique<judge::ReplayJudge>(endpoint, model, log));
    } else {
      for (const auto& path : jdg.endpoints) {
        record.inputs.emplace_back(path);
        owned.push_back(std::make_unique<judge::ChatCompletionJudge>(judge::load_endpoint_config(path)));
      }
    }
    std::vector<judge::Judge*> judges;
    for (auto& j : owned) judges.push_back(j.get());

    judge::BenchmarkOptions opts;
    if (auto a = cfg.get_list("judge", "affirmations"); !a.empty()) opts.lexicon.affirmations = a;
    if (auto n = cfg.get_list("judge", "negations"); !n.empty()) opts.lexicon.negations = n;
    opts.beta = pick(jdg.beta, cfg.get_double("judge", "beta", 1.0));

    judge::RunLog run_log(jdg.run_log);
    auto rows = judge::run_benchmark(eval, templates, judges, &run_log, opts);
    record.outputs.emplace_back(jdg.run_log);
    write_jsonl(jdg.out, judge::benchmark_records(rows));
    record.outputs.emplace_back(jdg.out);
    emit(judge::render_benchmark(rows), jdg.table, record);
  });

  // ------------------------------------------------------------ report
  struct {
    std::string results, labels, out;
  } rep;
  auto* report = app.add_subcommand("report", "Render benchmark results or annotation tallies as tables");
  report->add_option("--results", rep.results, "Benchmark result JSONL from judge")
      ->check(CLI::ExistingFile);
  report->add_option("--labels", rep.labels, "Final label JSONL")->check(CLI::ExistingFile);
  report->add_option("--out", rep.out, "Output file (default stdout)");
  on(report, [&] {
    if (rep.results.empty() && rep.labels.empty())
      throw UsageError("report needs --results and/or --labels");
    std::string text;
    if (!rep.results.empty()) {
      record.inputs.emplace_back(rep.results);
      std::vector<judge::BenchmarkRow> rows;
      for (const auto& r : read_jsonl(rep.results)) {
        try {
          judge::BenchmarkRow row;
          row.language = r.at("language");
          row.endpoint = r.at("endpoint");
          row.model = r.at("model");
          row.template_language = r.at("template_language");
          row.subtask = r.at("subtask");
          row.items = r.at("items");
          row.transport_failures = r.at("transport_failures");
          auto& m = row.metrics;
          m.tp = r.at("tp"), m.fp = r.at("fp"), m.fn = r.at("fn"), m.tn = r.at("tn");
          m.unparseable = r.at("unparseable");
          m.precision = r.at("precision"), m.recall = r.at("recall"), m.f_beta = r.at("f");
          m.beta = r.at("beta");
          rows.push_back(std::move(row));
        } catch (const Json::exception& e) {
          throw FormatError(rep.results + ": malformed result record: " + e.what());
        }
      }
      text += judge::render_benchmark(rows);
    }
    if (!rep.labels.empty()) {
      record.inputs.emplace_back(rep.labels);
      text += selector::render_annotation_report(
          selector::annotation_report(read_final_labels(rep.labels)));
    }
    emit(text, rep.out, record);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) std::cerr << "hint: run 'gecforge --help' for the list of subcommands\n";
    return code == 0 ? 0 : 2;
  }

  for (int i = 1; i < argc; ++i) record.arguments.emplace_back(argv[i]);
  int status = 0;
  try {
    if (!g.config_path.empty()) {
      g.config = PipelineConfig::load(g.config_path);
      record.inputs.emplace_back(g.config_path);
    }
    record.config_digest = g.config.digest();
    auto config_input = record.inputs;
    action();
    // subcommands assign their inputs wholesale; keep the config file listed
    for (const auto& p : config_input)
      if (std::find(record.inputs.begin(), record.inputs.end(), p) == record.inputs.end())
        record.inputs.insert(record.inputs.begin(), p);
  } catch (const Error& e) {
    record.status = "error";
    record.error = std::string(to_string(e.kind())) + ": " + e.what();
    std::cerr << "gecforge " << record.command << ": " << to_string(e.kind()) << ": "
              << e.what() << '\n';
    if (auto hint = hint_for(e.kind()); !hint.empty()) std::cerr << "hint: " << hint << '\n';
    status = exit_code_for(e.kind());
  } catch (const std::exception& e) {
    record.status = "error";
    record.error = e.what();
    std::cerr << "gecforge " << record.command << ": internal error: " << e.what() << '\n';
    status = 1;
  }
  try {
    if (!g.run_record.empty() && g.run_record != "-") append_run_record(g.run_record, record);
  } catch (const Error& e) {
    std::cerr << "gecforge: could not write run record: " << e.what() << '\n';
    if (status == 0) status = 1;
  }
  return status;
}
