#include <gtest/gtest.h>

#include <cstdlib>
#include <numeric>

#include "gecforge/error.hpp"
#include "gecforge/llm_judge.hpp"
#include "mock_endpoint.hpp"
#include "reported_scores.hpp"
#include "support.hpp"

using namespace gecforge;
using namespace gecforge::judge;
using aligner::ErrorCategory;
namespace gt = gecforge::testing;

namespace {

EndpointConfig endpoint_for(const gt::MockEndpoint& mock) {
  EndpointConfig c;
  c.name = "mock";
  c.base_url = mock.base_url();
  c.model = "mock-1";
  c.api_key_env = "GECFORGE_TEST_KEY";
  c.timeout_seconds = 5;
  c.backoff_initial = std::chrono::milliseconds(1);
  return c;
}

EvalSet eval_set(std::size_t n, std::size_t positives) {
  EvalSet set;
  set.language = "id";
  for (std::size_t i = 0; i < n; ++i) {
    EvalItem it;
    it.id = "e" + std::to_string(1000 + i);
    it.category = ErrorCategory::Misusing1;
    it.source = {"dia", "makan", std::to_string(i)};
    it.corrected = {"dia", "minum", std::to_string(i)};
    it.gold_subtask1 = i < positives;
    it.gold_subtask2 = i >= positives;
    set.items.push_back(it);
  }
  return set;
}

}  // namespace

TEST(Templates, BuiltinsValidateAndRender) {
  for (const auto& t : builtin_templates()) EXPECT_NO_THROW(t.validate()) << t.name;
  const auto& t = builtin_template("closed-en-1");
  auto prompt = render_prompt(t, "id", {"saya", "makan"}, {"saya", "sedang", "makan"}, 1);
  EXPECT_NE(prompt.find("Indonesian"), std::string::npos);
  EXPECT_NE(prompt.find("saya makan\n"), std::string::npos);
  EXPECT_NE(prompt.find("saya sedang makan"), std::string::npos);
  EXPECT_EQ(prompt.find('{'), std::string::npos);
  EXPECT_THROW(render_prompt(t, "id", {"a"}, {"b"}, 2), TemplateError);
  EXPECT_THROW(builtin_template("nope"), TemplateError);
}

TEST(Templates, OpenLayoutBracketsSentences) {
  auto prompt = render_prompt(builtin_template("open-en-2"), "en", {}, {"it", "are", "fine"}, 2);
  EXPECT_NE(prompt.find("[it are fine]"), std::string::npos) << prompt;
  EXPECT_EQ(prompt.rfind("### Instruction", 0), 0u);
}

TEST(Templates, ValidationRules) {
  EXPECT_THROW((PromptTemplate{"a", "{sentence 1} only", 1}.validate()), TemplateError);
  EXPECT_THROW((PromptTemplate{"b", "{sentence 2} only", 1}.validate()), TemplateError);
  EXPECT_NO_THROW((PromptTemplate{"c", "{sentence 2} only", 2}.validate()));
  EXPECT_THROW((PromptTemplate{"d", "{sentence 2} {sentence 2}", 2}.validate()), TemplateError);
  EXPECT_THROW((PromptTemplate{"e", "{language}{language}{sentence 2}", 2}.validate()),
               TemplateError);
  EXPECT_THROW((PromptTemplate{"f", "{sentence 2}", 3}.validate()), TemplateError);
}

TEST(Templates, SentenceTextIsNotReexpanded) {
  PromptTemplate t{"t", "A: {sentence 1} B: {sentence 2}", 1};
  EXPECT_EQ(render_prompt(t, "id", {"{sentence", "2}"}, {"x"}, 1), "A: {sentence 2} B: x");
}

TEST(Templates, LoadFromFile) {
  gt::TempDir dir;
  gt::spit(dir / "t.txt", "Check {sentence 2} in {language}.");
  auto t = load_template(dir / "t.txt", 2, "Indonesian");
  EXPECT_EQ(t.subtask, 2);
  EXPECT_EQ(t.template_language, "Indonesian");
  EXPECT_EQ(render_prompt(t, "id", {}, {"ok"}, 2), "Check ok in Indonesian.");
  gt::spit(dir / "bad.txt", "no placeholders");
  EXPECT_THROW(load_template(dir / "bad.txt", 2, "English"), TemplateError);
  EXPECT_EQ(language_name("id"), "Indonesian");
  EXPECT_EQ(language_name("xx"), "xx");
}

TEST(Verdicts, KeywordRule) {
  EXPECT_EQ(parse_verdict("Yes, the correction is accurate.", 1), Verdict::True);
  EXPECT_EQ(parse_verdict("No. It is inaccurate", 1), Verdict::False);
  EXPECT_EQ(parse_verdict("I think this is INCORRECT; yes the grammar", 1), Verdict::False);
  EXPECT_EQ(parse_verdict("The answer: correct", 2), Verdict::True);
  EXPECT_EQ(parse_verdict("I cannot tell.", 1), Verdict::Unparseable);
  EXPECT_EQ(parse_verdict("", 1), Verdict::Unparseable);
  // whole words only
  EXPECT_EQ(parse_verdict("Nothing is known; yesterday", 1), Verdict::Unparseable);
  EXPECT_EQ(parse_verdict("notably, yes", 1), Verdict::True);
}

TEST(Verdicts, CustomLexiconWithPhrasesAndOverlap) {
  Lexicon id;
  id.affirmations = {"ya", "benar"};
  id.negations = {"tidak", "tidak benar"};
  EXPECT_EQ(parse_verdict("Ya, koreksinya benar.", 1, id), Verdict::True);
  EXPECT_EQ(parse_verdict("Tidak benar.", 1, id), Verdict::False);
  Lexicon clash;
  clash.affirmations = {"ok"};
  clash.negations = {"ok"};
  EXPECT_EQ(parse_verdict("ok", 1, clash), Verdict::Unparseable);
  Lexicon phrase;
  phrase.affirmations = {"no errors"};
  phrase.negations = {"no"};
  EXPECT_EQ(parse_verdict("There are no errors.", 2, phrase), Verdict::Unparseable);
}

TEST(Metrics, FormulasAndZeroDenominators) {
  EXPECT_DOUBLE_EQ(precision(3, 1), 0.75);
  EXPECT_DOUBLE_EQ(recall(3, 3), 0.5);
  EXPECT_DOUBLE_EQ(precision(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(recall(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(f_beta(0, 0), 0.0);
  EXPECT_NEAR(f_beta(0.75, 0.5), 0.6, 1e-12);
  // F_0.5 = 1.25 P R / (0.25 P + R)
  EXPECT_NEAR(f_beta(0.75, 0.5, 0.5), 1.25 * 0.375 / (0.1875 + 0.5), 1e-12);
}

TEST(Metrics, ReportedF1IsHarmonicMean) {
  for (const auto* table : {&gt::subtask1_scores(), &gt::subtask2_scores()})
    for (const auto& row : *table) EXPECT_NEAR(f_beta(row.p, row.r), row.f, 0.001) << row.label;
}

TEST(Metrics, ReportedIndonesianAverages) {
  auto mean = [](const std::vector<gt::ScoreRow>& rows, double gt::ScoreRow::*field) {
    double s = 0;
    for (std::size_t i = 0; i < 6; ++i) s += rows[i].*field;
    return s / 6;
  };
  EXPECT_NEAR(mean(gt::subtask1_scores(), &gt::ScoreRow::p), 0.8613, 1e-4);
  EXPECT_NEAR(mean(gt::subtask1_scores(), &gt::ScoreRow::r), 0.7748, 1e-4);
  EXPECT_NEAR(mean(gt::subtask1_scores(), &gt::ScoreRow::f), 0.7623, 1e-4);
  EXPECT_NEAR(mean(gt::subtask2_scores(), &gt::ScoreRow::p), 0.2181, 1e-4);
  EXPECT_NEAR(mean(gt::subtask2_scores(), &gt::ScoreRow::r), 0.3384, 1e-4);
  EXPECT_NEAR(mean(gt::subtask2_scores(), &gt::ScoreRow::f), 0.1678, 1e-4);
}

TEST(Metrics, EvaluateConfusionAndUnparseable) {
  using V = Verdict;
  std::vector<bool> gold = {true, true, true, false, false, true, false};
  std::vector<V> pred = {V::True, V::False, V::Unparseable, V::True, V::False, V::True, V::Unparseable};
  auto m = evaluate(gold, pred);
  EXPECT_EQ(m.tp, 2u);
  EXPECT_EQ(m.fn, 1u);
  EXPECT_EQ(m.fp, 1u);
  EXPECT_EQ(m.tn, 1u);
  EXPECT_EQ(m.unparseable, 2u);
  EXPECT_DOUBLE_EQ(m.precision, 2.0 / 3);
  EXPECT_DOUBLE_EQ(m.recall, 2.0 / 3);
  auto neg = evaluate(gold, pred, false);
  EXPECT_EQ(neg.tp, 1u);
  EXPECT_EQ(neg.fp, 1u);
  EXPECT_EQ(neg.fn, 1u);
  EXPECT_THROW(evaluate({true}, {}), AlignmentError);
}

TEST(EvalSet, SamplesJudgedAndExcludesUndetermined) {
  model_bridge::CandidateSet cands;
  std::vector<FinalLabel> labels;
  for (int i = 0; i < 30; ++i) {
    model_bridge::Candidate c;
    c.id = "k" + std::to_string(100 + i);
    c.source = {"a", "b"};
    c.hypothesis = {"a", "c"};
    c.category = i < 20 ? ErrorCategory::Misusing1 : ErrorCategory::Missing2;
    cands.pairs.push_back(c);
    FinalLabel l{c.id, c.category, CorrectionLabel::Accurate, ResidualLabel::NoErrors, 1};
    if (i % 5 == 0) l.subtask1 = CorrectionLabel::Inaccurate;
    if (i % 4 == 0) l.subtask2 = ResidualLabel::HasErrors;
    if (i == 7) l.subtask2 = ResidualLabel::Undetermined;
    if (i == 9) l.judgments = 0;
    labels.push_back(l);
  }
  auto [set, report] = build_eval_set(labels, cands, 100, 3, "id");
  // 29 judged; item 7 is undetermined
  EXPECT_EQ(report.sampled, 29u);
  EXPECT_EQ(report.excluded_undetermined, 1u);
  EXPECT_EQ(set.items.size(), 28u);
  EXPECT_EQ(report.shortfall.at(ErrorCategory::Misusing1), 81u);
  EXPECT_EQ(report.subtask1_true + report.subtask1_false, 28u);
  std::size_t inaccurate = 0, has_errors = 0;
  for (const auto& it : set.items) {
    inaccurate += !it.gold_subtask1;
    has_errors += it.gold_subtask2;
  }
  EXPECT_EQ(report.subtask1_false, inaccurate);
  EXPECT_EQ(report.subtask2_true, has_errors);
  EXPECT_EQ(inaccurate, 6u);  // 0,5,10,15,20,25
  EXPECT_TRUE(std::is_sorted(set.items.begin(), set.items.end(),
                             [](const auto& a, const auto& b) { return a.id < b.id; }));

  auto [small, small_report] = build_eval_set(labels, cands, 4, 3, "id");
  auto [again, again_report] = build_eval_set(labels, cands, 4, 3, "id");
  EXPECT_EQ(small.items, again.items);
  EXPECT_LE(small.items.size(), 8u);

  auto text = render_label_distribution(report, "Indonesian");
  EXPECT_EQ(text.rfind("Task\tLabel\tIndonesian\nsubtask 1\tFalse\t6\n", 0), 0u) << text;

  gt::TempDir dir;
  write_eval_set(dir / "eval.jsonl", set);
  auto back = read_eval_set(dir / "eval.jsonl");
  EXPECT_EQ(back.language, "id");
  EXPECT_EQ(back.items, set.items);

  labels.push_back({"ghost", ErrorCategory::Missing1, CorrectionLabel::Accurate,
                    ResidualLabel::NoErrors, 1});
  EXPECT_THROW(build_eval_set(labels, cands, 100, 3, "id"), LoadError);
}

TEST(Endpoint, ConfigParsingRejectsInlineKeys) {
  auto c = parse_endpoint_config(
      "# judge\nname = gpt\nbase_url = https://api.example.com/v1\nmodel = m\nmode = open\n"
      "beams = 6\nrequests_per_minute = 30\nbackoff_initial_ms = 250\n",
      "cfg");
  EXPECT_EQ(c.name, "gpt");
  EXPECT_EQ(c.mode, EndpointMode::Open);
  EXPECT_EQ(c.decoding.beams, 6);
  EXPECT_EQ(c.backoff_initial, std::chrono::milliseconds(250));
  EXPECT_EQ(c.api_key_env, "OPENAI_API_KEY");
  EXPECT_THROW(parse_endpoint_config("base_url = x\nmodel = m\napi_key = sk-live\n", "cfg"),
               ConfigError);
  EXPECT_THROW(parse_endpoint_config("model = m\n", "cfg"), ConfigError);
  EXPECT_THROW(parse_endpoint_config("base_url = x\nmodel = m\nretries = 2\n", "cfg"), ConfigError);
  EXPECT_THROW(parse_endpoint_config("base_url = x\nmodel = m\nmode = mixed\n", "cfg"), ConfigError);
}

TEST(Endpoint, RequestBodyCarriesDecodingParameters) {
  EndpointConfig c;
  c.model = "m";
  c.decoding.temperature = 0.7;
  auto closed = build_request(c, "hi");
  EXPECT_EQ(closed["model"], "m");
  EXPECT_EQ(closed["messages"][0]["content"], "hi");
  EXPECT_DOUBLE_EQ(closed["temperature"].get<double>(), 0.7);
  EXPECT_TRUE(closed.contains("presence_penalty"));
  EXPECT_FALSE(closed.contains("num_beams"));
  c.mode = EndpointMode::Open;
  auto open = build_request(c, "hi");
  EXPECT_EQ(open["num_beams"], 4);
  EXPECT_FALSE(open.contains("frequency_penalty"));
}

TEST(Endpoint, RetriesRateLimitThenSucceeds) {
  gt::MockEndpoint mock([](int call, const Json&) -> gt::MockEndpoint::Reply {
    if (call <= 2) return {429, "{}"};
    return {200, gt::MockEndpoint::completion("Yes.")};
  });
  ::setenv("GECFORGE_TEST_KEY", "sk-test", 1);
  int attempts = 0, status = 0;
  EXPECT_EQ(query_judge(endpoint_for(mock), "prompt", &attempts, &status), "Yes.");
  ::unsetenv("GECFORGE_TEST_KEY");
  EXPECT_EQ(attempts, 3);
  EXPECT_EQ(status, 200);
  EXPECT_EQ(mock.calls(), 3u);
  EXPECT_EQ(mock.authorizations()[0], "Bearer sk-test");
  EXPECT_EQ(mock.requests()[0]["messages"][0]["content"], "prompt");
}

TEST(Endpoint, FailureKinds) {
  gt::MockEndpoint rate([](int, const Json&) -> gt::MockEndpoint::Reply { return {429, "{}"}; });
  auto cfg = endpoint_for(rate);
  cfg.max_retries = 2;
  EXPECT_THROW(query_judge(cfg, "p"), RateLimitError);
  EXPECT_EQ(rate.calls(), 3u);

  gt::MockEndpoint denied([](int, const Json&) -> gt::MockEndpoint::Reply { return {401, "{}"}; });
  EXPECT_THROW(query_judge(endpoint_for(denied), "p"), AuthError);
  EXPECT_EQ(denied.calls(), 1u);
  EXPECT_TRUE(denied.authorizations()[0].empty());

  gt::MockEndpoint broken([](int, const Json&) -> gt::MockEndpoint::Reply { return {503, "{}"}; });
  cfg = endpoint_for(broken);
  cfg.max_retries = 1;
  EXPECT_THROW(query_judge(cfg, "p"), TransportError);
  EXPECT_EQ(broken.calls(), 2u);

  gt::MockEndpoint bad([](int, const Json&) -> gt::MockEndpoint::Reply { return {400, "nope"}; });
  EXPECT_THROW(query_judge(endpoint_for(bad), "p"), TransportError);
  EXPECT_EQ(bad.calls(), 1u);

  gt::MockEndpoint slow([](int, const Json&) -> gt::MockEndpoint::Reply {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    return {200, gt::MockEndpoint::completion("yes")};
  });
  cfg = endpoint_for(slow);
  cfg.timeout_seconds = 0.2;
  cfg.max_retries = 0;
  EXPECT_THROW(query_judge(cfg, "p"), TimeoutError);
}

TEST(Endpoint, ChatJudgeTurnsFailuresIntoReplies) {
  gt::MockEndpoint mock([](int call, const Json&) -> gt::MockEndpoint::Reply {
    return call == 1 ? gt::MockEndpoint::Reply{500, "{}"}
                     : gt::MockEndpoint::Reply{200, gt::MockEndpoint::completion("no")};
  });
  auto cfg = endpoint_for(mock);
  cfg.max_retries = 0;
  ChatCompletionJudge judge(cfg);
  auto first = judge.query("p", {"x", 1, "English"});
  EXPECT_FALSE(first.text);
  EXPECT_EQ(first.error, ErrorKind::Transport);
  auto second = judge.query("p", {"x", 1, "English"});
  EXPECT_EQ(second.text, "no");
  EXPECT_EQ(second.http_status, 200);
  EXPECT_EQ(second.request["model"], "mock-1");
}

TEST(Benchmark, ConstantYesOnEightyPercentPositives) {
  auto set = eval_set(50, 40);
  ScriptedJudge yes("const", "always-yes", [](const std::string&, const QueryContext&) { return "Yes"; });
  auto rows = run_benchmark(set, {builtin_template("closed-en-1")}, {&yes}, nullptr);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].metrics.tp, 40u);
  EXPECT_EQ(rows[0].metrics.fp, 10u);
  EXPECT_DOUBLE_EQ(rows[0].metrics.precision, 0.8);
  EXPECT_DOUBLE_EQ(rows[0].metrics.recall, 1.0);
  EXPECT_EQ(yes.calls(), 50u);
}

TEST(Benchmark, ScriptedMixAndRunLogReplay) {
  auto set = eval_set(10, 6);  // subtask 1 golds: 6 true, 4 false
  // item i answers by index: 0-3 yes, 4-5 "unsure", 6-7 yes, 8 no, 9 throws
  ScriptedJudge judge("scripted", "mix", [](const std::string&, const QueryContext& ctx) -> std::string {
    const int i = std::stoi(ctx.item_id.substr(1)) - 1000;
    if (i == 9) throw TransportError("connection reset");
    if (i == 4 || i == 5) return "unsure";
    if (i == 8) return "no";
    return "yes";
  });
  gt::TempDir dir;
  RunLog log(dir / "run.jsonl");
  auto rows = run_benchmark(set, {builtin_template("closed-en-1")}, {&judge}, &log);
  ASSERT_EQ(rows.size(), 1u);
  const auto& m = rows[0].metrics;
  EXPECT_EQ(m.tp, 4u);
  EXPECT_EQ(m.fp, 2u);
  EXPECT_EQ(m.fn, 0u);
  EXPECT_EQ(m.tn, 1u);
  EXPECT_EQ(m.unparseable, 3u);
  EXPECT_EQ(rows[0].transport_failures, 1u);
  EXPECT_EQ(rows[0].items, 10u);

  auto records = read_jsonl(dir / "run.jsonl");
  ASSERT_EQ(records.size(), 10u);
  EXPECT_EQ(records[0]["item_id"], "e1000");
  EXPECT_EQ(records[9]["error_kind"], "transport");
  EXPECT_EQ(records[4]["verdict"], "unparseable");
  EXPECT_EQ(run_log_endpoints(records),
            (std::vector<std::pair<std::string, std::string>>{{"scripted", "mix"}}));

  ReplayJudge replay("scripted", "mix", records);
  auto again = run_benchmark(set, {builtin_template("closed-en-1")}, {&replay}, nullptr);
  EXPECT_EQ(render_benchmark(again), render_benchmark(rows));
  auto missing = replay.query("p", {"e9999", 1, "English"});
  EXPECT_EQ(missing.error, ErrorKind::NotFound);
}

TEST(Benchmark, AuthFailureAborts) {
  auto set = eval_set(3, 1);
  ScriptedJudge judge("s", "m", [](const std::string&, const QueryContext&) -> std::string {
    throw AuthError("bad key");
  });
  EXPECT_THROW(run_benchmark(set, {builtin_template("closed-en-1")}, {&judge}, nullptr), AuthError);
}

TEST(Benchmark, RenderedTableLayout) {
  auto set = eval_set(5, 5);
  ScriptedJudge a("a", "gpt", [](const std::string&, const QueryContext&) { return "yes"; });
  auto rows = run_benchmark(set, {builtin_template("closed-en-1"), builtin_template("closed-id-2")},
                            {&a}, nullptr);
  ASSERT_EQ(rows.size(), 2u);
  auto text = render_benchmark(rows);
  EXPECT_NE(text.find("# subtask 1\nLanguage\tModel\tP\tR\tF\t"), std::string::npos) << text;
  EXPECT_NE(text.find("Indonesian\tgpt (English Template)\t1.0000\t1.0000\t1.0000\t5\t0\t0\t0\t0\t0\n"),
            std::string::npos)
      << text;
  EXPECT_NE(text.find("gpt (Indonesian Template)\t0.0000"), std::string::npos) << text;
  EXPECT_EQ(benchmark_records(rows).size(), 2u);
}

TEST(Benchmark, ConcurrentChatJudgeKeepsItemOrder) {
  gt::MockEndpoint mock([](int, const Json& req) -> gt::MockEndpoint::Reply {
    const std::string prompt = req["messages"][0]["content"];
    return {200, gt::MockEndpoint::completion(prompt.find(" 3\n") != std::string::npos ? "no" : "yes")};
  });
  auto cfg = endpoint_for(mock);
  cfg.max_concurrency = 4;
  ChatCompletionJudge judge(cfg);
  auto set = eval_set(12, 12);
  gt::TempDir dir;
  RunLog log(dir / "run.jsonl");
  auto rows = run_benchmark(set, {builtin_template("closed-en-1")}, {&judge}, &log);
  EXPECT_EQ(rows[0].metrics.tp, 11u);
  EXPECT_EQ(rows[0].metrics.fn, 1u);
  auto records = read_jsonl(dir / "run.jsonl");
  for (std::size_t i = 0; i < records.size(); ++i) EXPECT_EQ(records[i]["item_id"], set.items[i].id);
  EXPECT_EQ(records[3]["verdict"], "false");
}
