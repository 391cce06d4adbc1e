#include <gtest/gtest.h>

#include <algorithm>
#include <thread>

#include "httplib.h"

#include "gecforge/annotation.hpp"
#include "gecforge/annotation_server.hpp"
#include "gecforge/error.hpp"
#include "support.hpp"

using namespace gecforge;
using namespace gecforge::annotation;
using aligner::ErrorCategory;
namespace gt = gecforge::testing;

namespace {

using C = CorrectionLabel;
using R = ResidualLabel;

Judgment vote(const std::string& who, C s1, R s2, const std::string& item = "i") {
  return {item, who, s1, s2, "2026-01-01T00:00:00Z"};
}

struct Fixture {
  model_bridge::CandidateSet candidates;
  selector::SampleManifest manifest;

  explicit Fixture(std::size_t n) {
    model_bridge::PredictionSet preds;
    for (std::size_t i = 0; i < n; ++i)
      preds.pairs.push_back({"c" + std::to_string(i), {"kami", "ke", "pasar"},
                             {"kami", "pergi", "ke", "pasar"}});
    candidates = model_bridge::extract_candidates(preds);
    manifest = selector::stratified_sample(candidates, n, 1);
  }

  std::vector<AnnotationItem> items() const { return load_tasks(manifest, candidates); }
};

}  // namespace

TEST(Adjudicate, MajorityNeedsMoreThanHalf) {
  AdjudicationPolicy p{PolicyMode::Majority, 3};
  auto l = adjudicate("i", ErrorCategory::Missing1,
                      {vote("a", C::Accurate, R::NoErrors), vote("b", C::Accurate, R::HasErrors),
                       vote("c", C::Inaccurate, R::Undetermined)},
                      p);
  EXPECT_EQ(l.subtask1, C::Accurate);
  EXPECT_EQ(l.subtask2, R::Undetermined);
  EXPECT_EQ(l.judgments, 3u);
  EXPECT_EQ(l.category, ErrorCategory::Missing1);
}

TEST(Adjudicate, UnanimousNeedsAgreement) {
  AdjudicationPolicy p{PolicyMode::Unanimous, 2};
  auto agree = adjudicate("i", ErrorCategory::Misusing1,
                          {vote("a", C::Accurate, R::NoErrors), vote("b", C::Accurate, R::HasErrors)}, p);
  EXPECT_EQ(agree.subtask1, C::Accurate);
  EXPECT_EQ(agree.subtask2, R::Undetermined);
}

TEST(Adjudicate, SingleTakesTheOnlyJudgment) {
  AdjudicationPolicy p;
  auto l = adjudicate("i", ErrorCategory::Misusing1, {vote("a", C::Inaccurate, R::HasErrors)}, p);
  EXPECT_EQ(l.subtask1, C::Inaccurate);
  EXPECT_EQ(l.subtask2, R::HasErrors);
  auto several = adjudicate("i", ErrorCategory::Misusing1,
                            {vote("a", C::Accurate, R::HasErrors), vote("b", C::Inaccurate, R::HasErrors)}, p);
  EXPECT_EQ(several.subtask1, C::Undetermined);
  EXPECT_EQ(several.subtask2, R::HasErrors);
}

TEST(Adjudicate, OrderDoesNotMatter) {
  AdjudicationPolicy p{PolicyMode::Majority, 5};
  std::vector<Judgment> js = {vote("a", C::Accurate, R::NoErrors), vote("b", C::Inaccurate, R::NoErrors),
                              vote("c", C::Accurate, R::HasErrors), vote("d", C::Undetermined, R::NoErrors),
                              vote("e", C::Accurate, R::HasErrors)};
  auto first = adjudicate("i", ErrorCategory::Missing2, js, p);
  std::sort(js.begin(), js.end(), [](const auto& x, const auto& y) { return x.annotator_id > y.annotator_id; });
  do {
    EXPECT_EQ(adjudicate("i", ErrorCategory::Missing2, js, p), first);
  } while (std::next_permutation(js.begin(), js.end(), [](const auto& x, const auto& y) {
    return x.annotator_id < y.annotator_id;
  }));
  EXPECT_EQ(first.subtask1, C::Accurate);
  EXPECT_EQ(first.subtask2, R::NoErrors);
}

TEST(Policy, Validation) {
  EXPECT_NO_THROW((AdjudicationPolicy{PolicyMode::Single, 1}.validate()));
  EXPECT_THROW((AdjudicationPolicy{PolicyMode::Single, 2}.validate()), ConfigError);
  EXPECT_THROW((AdjudicationPolicy{PolicyMode::Majority, 2}.validate()), ConfigError);
  EXPECT_NO_THROW((AdjudicationPolicy{PolicyMode::Majority, 3}.validate()));
  EXPECT_THROW((AdjudicationPolicy{PolicyMode::Unanimous, 0}.validate()), ConfigError);
  EXPECT_EQ(parse_policy_mode("majority"), PolicyMode::Majority);
  EXPECT_THROW(parse_policy_mode("plurality"), ConfigError);
}

TEST(Tasks, LoadSortedWithDiff) {
  Fixture f(4);
  auto items = f.items();
  ASSERT_EQ(items.size(), 4u);
  EXPECT_TRUE(std::is_sorted(items.begin(), items.end(),
                             [](const auto& a, const auto& b) { return a.item_id < b.item_id; }));
  EXPECT_EQ(items[0].category, ErrorCategory::Missing1);
  EXPECT_EQ(items[0].status, ItemStatus::Pending);
  EXPECT_EQ(aligner::reconstruct_corrected(items[0].diff), items[0].corrected);
  f.candidates.pairs.pop_back();
  EXPECT_THROW(f.items(), LoadError);
}

TEST(Finalize, UnderpopulatedItemsReportedOrSkipped) {
  Fixture f(3);
  auto items = f.items();
  AdjudicationPolicy p{PolicyMode::Majority, 3};
  std::vector<Judgment> js;
  for (const char* who : {"a", "b", "c"}) js.push_back(vote(who, C::Accurate, R::NoErrors, items[0].item_id));
  js.push_back(vote("a", C::Accurate, R::NoErrors, items[1].item_id));
  try {
    finalize_labels(items, js, p);
    FAIL();
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(items[1].item_id), std::string::npos);
    EXPECT_NE(msg.find(items[2].item_id), std::string::npos);
  }
  auto labels = finalize_labels(items, js, p, true);
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0].item_id, items[0].item_id);
  EXPECT_EQ(labels[0].subtask1, C::Accurate);
}

TEST(Log, TornTailIsCutAndCorruptLineRejected) {
  gt::TempDir dir;
  const auto path = dir / "j.ndjson";
  {
    JudgmentLog log(path);
    log.append(vote("a", C::Accurate, R::NoErrors));
    log.append(vote("b", C::Inaccurate, R::HasErrors));
  }
  const auto intact = gt::slurp(path);
  gt::spit(path, intact + "{\"item_id\":\"i\",\"annot");
  {
    JudgmentLog log(path);
    EXPECT_TRUE(log.truncated_tail());
    ASSERT_EQ(log.replayed().size(), 2u);
    EXPECT_EQ(log.replayed()[1].annotator_id, "b");
    EXPECT_EQ(log.contents(), intact);
  }
  EXPECT_EQ(gt::slurp(path), intact);
  gt::spit(path, "not json\n" + intact);
  EXPECT_THROW(JudgmentLog{path}, FormatError);
}

TEST(Store, AssignsFewestJudgedFirstAndRespectsCapacity) {
  gt::TempDir dir;
  Fixture f(2);
  auto items = f.items();
  AnnotationStore store(items, {"a", "b", "c", "d"}, {PolicyMode::Majority, 3}, dir / "log");
  auto a = store.next_item("a");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->item_id, items[0].item_id);
  EXPECT_EQ(store.next_item("a")->item_id, a->item_id);  // lease is sticky
  EXPECT_EQ(store.next_item("b")->item_id, items[0].item_id);
  EXPECT_EQ(store.next_item("c")->item_id, items[0].item_id);
  EXPECT_EQ(store.next_item("d")->item_id, items[1].item_id);  // item 0 full
  EXPECT_EQ(store.item(items[0].item_id)->status, ItemStatus::InProgress);
  EXPECT_EQ(store.progress().in_progress, 2u);

  auto ack = store.submit_judgment(vote("a", C::Accurate, R::NoErrors, items[0].item_id));
  EXPECT_EQ(ack.sequence, 1u);
  EXPECT_EQ(ack.status, ItemStatus::InProgress);
  EXPECT_EQ(store.next_item("a")->item_id, items[1].item_id);
  store.submit_judgment(vote("b", C::Accurate, R::NoErrors, items[0].item_id));
  ack = store.submit_judgment(vote("c", C::Inaccurate, R::NoErrors, items[0].item_id));
  EXPECT_EQ(ack.status, ItemStatus::Done);
  EXPECT_FALSE(store.next_item("b") && store.next_item("b")->item_id == items[0].item_id);
  auto progress = store.progress();
  EXPECT_EQ(progress.done, 1u);
  EXPECT_EQ(progress.judgments, 3u);
  EXPECT_EQ(progress.per_annotator.at("a"), 1u);
}

TEST(Store, ExpiredLeaseFreesCapacity) {
  gt::TempDir dir;
  Fixture f(1);
  AnnotationStore store(f.items(), {"a", "b"}, {}, dir / "log", std::chrono::seconds(0));
  ASSERT_TRUE(store.next_item("a"));
  EXPECT_TRUE(store.next_item("b"));  // a's lease has already lapsed
}

TEST(Store, RejectsUnknownAnnotatorItemAndRepeat) {
  gt::TempDir dir;
  Fixture f(1);
  const auto id = f.items()[0].item_id;
  AnnotationStore store(f.items(), {"a"}, {}, dir / "log");
  EXPECT_THROW(store.next_item("mallory"), AuthError);
  EXPECT_THROW(store.submit_judgment(vote("mallory", C::Accurate, R::NoErrors, id)), AuthError);
  EXPECT_THROW(store.submit_judgment(vote("a", C::Accurate, R::NoErrors, "nope")), NotFoundError);
  store.submit_judgment(vote("a", C::Accurate, R::NoErrors, id));
  EXPECT_THROW(store.submit_judgment(vote("a", C::Inaccurate, R::NoErrors, id)), ConflictError);
  EXPECT_EQ(store.judgments().size(), 1u);
  EXPECT_FALSE(store.next_item("a"));
}

TEST(Store, ReopenReplaysLog) {
  gt::TempDir dir;
  Fixture f(3);
  auto items = f.items();
  {
    AnnotationStore store(items, {"a"}, {}, dir / "log");
    for (const auto& it : items) store.submit_judgment(vote("a", C::Accurate, R::HasErrors, it.item_id));
  }
  AnnotationStore again(items, {"a"}, {}, dir / "log");
  EXPECT_EQ(again.replayed_count(), 3u);
  EXPECT_EQ(again.progress().done, 3u);
  EXPECT_THROW(again.submit_judgment(vote("a", C::Accurate, R::NoErrors, items[1].item_id)),
               ConflictError);
  auto labels = again.finalize();
  ASSERT_EQ(labels.size(), 3u);
  EXPECT_EQ(labels[2].subtask2, R::HasErrors);
  EXPECT_EQ(again.export_log(), gt::slurp(dir / "log"));
}

TEST(Store, ConcurrentSubmissionsAllLogged) {
  gt::TempDir dir;
  Fixture f(20);
  auto items = f.items();
  std::set<std::string> who;
  for (int a = 0; a < 4; ++a) who.insert("ann" + std::to_string(a));
  AnnotationStore store(items, who, {PolicyMode::Unanimous, 4}, dir / "log");
  std::vector<std::thread> threads;
  for (const auto& name : who)
    threads.emplace_back([&, name] {
      while (auto item = store.next_item(name))
        store.submit_judgment(vote(name, C::Accurate, R::NoErrors, item->item_id));
    });
  for (auto& t : threads) t.join();
  EXPECT_EQ(store.progress().done, 20u);
  EXPECT_EQ(read_jsonl(dir / "log").size(), 80u);
}

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    items = fixture.items();
    store = std::make_unique<AnnotationStore>(items, std::set<std::string>{"a", "b"},
                                              AdjudicationPolicy{}, dir / "log");
    server = std::make_unique<AnnotationServer>(*store);
    port = server->bind("127.0.0.1", 0);
    thread = std::thread([this] { server->serve(); });
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    for (int i = 0; i < 200 && !server->running(); ++i)
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  void TearDown() override {
    server->stop();
    thread.join();
  }

  httplib::Result post(const Json& body) {
    return client->Post("/judgments", body.dump(), "application/json");
  }

  gt::TempDir dir;
  Fixture fixture{2};
  std::vector<AnnotationItem> items;
  std::unique_ptr<AnnotationStore> store;
  std::unique_ptr<AnnotationServer> server;
  std::unique_ptr<httplib::Client> client;
  std::thread thread;
  int port = 0;
};

TEST_F(ServerTest, NextItemSubmitAndProgress) {
  auto res = client->Get("/items/next?annotator=a");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  auto item = Json::parse(res->body)["item"];
  EXPECT_EQ(item["item_id"], items[0].item_id);
  EXPECT_EQ(item["category"], "missing_1");
  EXPECT_EQ(item["diff"].size(), 4u);

  res = post(to_json(vote("a", C::Accurate, R::NoErrors, items[0].item_id)));
  ASSERT_EQ(res->status, 200);
  auto ack = Json::parse(res->body);
  EXPECT_EQ(ack["ok"], true);
  EXPECT_EQ(ack["sequence"], 1);
  EXPECT_EQ(ack["status"], "done");

  auto progress = Json::parse(client->Get("/progress")->body);
  EXPECT_EQ(progress["done"], 1);
  EXPECT_EQ(progress["pending"], 1);
  auto one = client->Get(("/items/" + items[0].item_id).c_str());
  EXPECT_EQ(Json::parse(one->body)["judgments"], 1);
  EXPECT_EQ(client->Get("/export")->body, gt::slurp(dir / "log"));
}

TEST_F(ServerTest, ErrorStatusesAndBodies) {
  auto body = [](const httplib::Result& r) { return Json::parse(r->body); };
  auto res = client->Get("/items/next?annotator=mallory");
  EXPECT_EQ(res->status, 401);
  EXPECT_EQ(body(res)["error"], "auth");
  res = client->Get("/items/next");
  EXPECT_EQ(res->status, 400);
  res = client->Get("/items/unknown");
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(body(res)["error"], "not_found");
  res = client->Post("/judgments", "{broken", "application/json");
  EXPECT_EQ(res->status, 400);
  res = post({{"item_id", items[0].item_id}, {"annotator_id", "a"}, {"subtask1", "maybe"},
              {"subtask2", "no_errors"}});
  EXPECT_EQ(res->status, 400);

  const auto good = to_json(vote("b", C::Inaccurate, R::HasErrors, items[1].item_id));
  EXPECT_EQ(post(good)->status, 200);
  res = post(good);
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(body(res)["error"], "conflict");
  EXPECT_EQ(store->judgments().size(), 1u);
}

TEST_F(ServerTest, ExhaustedQueueReturnsNullItem) {
  for (const auto& it : items) post(to_json(vote("a", C::Accurate, R::NoErrors, it.item_id)));
  auto res = client->Get("/items/next?annotator=a");
  ASSERT_EQ(res->status, 200);
  EXPECT_TRUE(Json::parse(res->body)["item"].is_null());
}
