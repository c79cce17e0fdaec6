#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <functional>
#include <set>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "tableforge/error.hpp"
#include "tableforge/runner.hpp"
#include "testkit.hpp"

namespace tableforge {
namespace {

using nlohmann::json;
using Responses = std::map<std::pair<std::string, int>, std::string>;

Prompts prompts() { return load_prompts(TABLEFORGE_PROMPTS); }

ErrorCode error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kIoError;
}

class RunnerFixture : public ::testing::Test {
 protected:
  std::map<std::string, TableAsset> tables{{"fixture_a", testkit::fixture_a_asset()}};

  std::vector<TrajectoryInstance> instances(Category c, std::size_t n) {
    std::vector<TrajectoryInstance> out;
    std::set<std::string> seen;
    for (std::uint64_t seed = 0; out.size() < n && seed < 1000; ++seed) {
      TrajectoryInstance inst = synthesize_instance(tables.at("fixture_a"), c, seed);
      if (!seen.insert(inst.question).second) continue;
      inst.id = "q" + std::to_string(out.size());
      out.push_back(inst);
    }
    return out;
  }
};

TEST(Prompts, FillTemplate) {
  EXPECT_EQ(fill_template("Q: {question} {unknown}", {{"question", "why"}}), "Q: why {unknown}");
  const Prompts p = prompts();
  EXPECT_EQ(p.version, "v1");
  EXPECT_NE(p.stage2.user.find("{question}"), std::string::npos);
  EXPECT_NE(p.anchor_block.find("{anchors}"), std::string::npos);
}

TEST(Runner, ExtractAnswer) {
  EXPECT_EQ(extract_answer("Reasoning...\nAnswer: 10"), "10");
  EXPECT_EQ(extract_answer("Answer: 3\nmore\nAnswer:  2021  \ntrailing"), "2021");
  EXPECT_EQ(error_of([] { extract_answer("the value is 10"); }), ErrorCode::kAnswerMissing);
}

TEST_F(RunnerFixture, ReplayStages) {
  const TrajectoryInstance inst = instances(Category::kRetrieval, 1)[0];
  ReplayBackend replay(Responses{{{inst.id, 1}, "The target cell sits under Revenue.\n[cell] (250,500)(437,749)"},
                                 {{inst.id, 2}, "Reading the cell.\nAnswer: 10"}});
  const StageOneResult s1 = run_stage1(inst, replay, prompts());
  ASSERT_EQ(s1.predicted.size(), 1u);
  EXPECT_EQ(s1.predicted[0].bbox, (NormBBox{250, 500, 437, 749}));
  EXPECT_EQ(run_stage2(inst, format_grounding_lines(s1.predicted), replay, prompts()).answer, "10");

  ReplayBackend blank(Responses{{{inst.id, 1}, "I cannot see it."}, {{inst.id, 2}, "It is ten."}});
  EXPECT_EQ(error_of([&] { run_stage1(inst, blank, prompts()); }), ErrorCode::kNoValidLines);
  EXPECT_EQ(error_of([&] { run_stage2(inst, std::nullopt, blank, prompts()); }), ErrorCode::kAnswerMissing);
  ReplayBackend none(Responses{});
  EXPECT_EQ(error_of([&] { run_stage1(inst, none, prompts()); }), ErrorCode::kBackendError);
}

TEST_F(RunnerFixture, ReplayFromFile) {
  const auto dir = testkit::temp_dir("replay");
  std::ofstream((dir / "r.jsonl").string()) << R"({"id":"a","stage":2,"text":"Answer: 1"})" << "\n"
                                            << R"({"id":"a","stage":2,"text":"Answer: 2"})" << "\n";
  ReplayBackend replay((dir / "r.jsonl").string());
  ModelRequest req;
  req.instance_id = "a";
  req.stage = 2;
  EXPECT_EQ(replay.complete(req), "Answer: 2");
}

TEST_F(RunnerFixture, OracleScoresRetrievalPerfectly) {
  const auto items = instances(Category::kRetrieval, 8);
  ASSERT_EQ(items.size(), 8u);
  OracleBackend oracle(items, tables);
  for (RunMode mode : {RunMode::kOracle, RunMode::kTwoStage}) {
    const RunResult r = run_pipeline(items, oracle, oracle, prompts(), {mode, 3});
    EXPECT_DOUBLE_EQ(r.report.overall.value(), 1.0) << to_string(mode);
  }
  const RunResult two = run_pipeline(items, oracle, oracle, prompts(), {RunMode::kTwoStage, 1});
  ASSERT_TRUE(two.iou.has_value());
  EXPECT_DOUBLE_EQ(two.iou->median, 1.0);
}

TEST_F(RunnerFixture, TwoStageMixAndFactorization) {
  const auto items = instances(Category::kRetrieval, 2);
  Responses canned;
  for (const auto& inst : items) {
    const NormBBox b = inst.evidence[0].bbox_norm;
    canned[{inst.id, 1}] = "Reason.\n[cell]  (" + std::to_string(b.x1) + ", " + std::to_string(b.y1) + ")(" +
                           std::to_string(b.x2) + "," + std::to_string(b.y2) + ")\n[blob] (1,1)(2,2)";
  }
  canned[{items[0].id, 2}] = "Answer: " + items[0].answer;
  canned[{items[1].id, 2}] = "Answer: not it";
  ReplayBackend replay(canned);
  const RunResult r = run_pipeline(items, replay, replay, prompts(), {RunMode::kTwoStage, 2});
  EXPECT_DOUBLE_EQ(r.report.overall.value(), 0.5);
  for (const auto& rec : r.records) {
    ASSERT_TRUE(rec.stage1.has_value());
    ASSERT_TRUE(rec.anchors_sent.has_value());
    EXPECT_EQ(*rec.anchors_sent, format_grounding_lines(rec.stage1->result.predicted));
    ASSERT_EQ(rec.ious.size(), 1u);
    EXPECT_DOUBLE_EQ(rec.ious[0], 1.0);
  }
  EXPECT_EQ(r.records[0].instance_id, "q0");
}

TEST_F(RunnerFixture, EndToEndSendsNoAnchors) {
  const auto items = instances(Category::kRetrieval, 3);
  Responses canned;
  for (const auto& inst : items) canned[{inst.id, 2}] = "Answer: " + inst.answer;
  ReplayBackend replay(canned);
  const RunResult r = run_pipeline(items, replay, replay, prompts(), {RunMode::kEndToEnd, 1});
  EXPECT_DOUBLE_EQ(r.report.overall.value(), 1.0);
  for (const auto& rec : r.records) {
    EXPECT_FALSE(rec.stage1.has_value());
    EXPECT_FALSE(rec.anchors_sent.has_value());
    const json j = to_json(rec, false);
    EXPECT_FALSE(j.contains("stage1"));
    EXPECT_FALSE(j.contains("anchors"));
    EXPECT_FALSE(j.contains("stage1_ms"));
  }
  EXPECT_FALSE(r.iou.has_value());
}

TEST_F(RunnerFixture, FailuresStayOnTheirRecord) {
  const auto items = instances(Category::kRetrieval, 3);
  Responses canned;
  for (const auto& inst : items) canned[{inst.id, 2}] = "Answer: " + inst.answer;
  canned[{items[0].id, 1}] = "[cell] (250,500)(437,749)";
  canned[{items[1].id, 1}] = "nothing useful";
  // items[2] has no stage-1 response at all.
  ReplayBackend replay(canned);
  const RunResult r = run_pipeline(items, replay, replay, prompts(), {RunMode::kTwoStage, 3});
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_FALSE(r.records[0].stage1->localization_failed);
  EXPECT_TRUE(r.records[1].stage1->localization_failed);
  EXPECT_TRUE(r.records[2].stage1->localization_failed);
  EXPECT_TRUE(r.records[1].errors.empty());
  EXPECT_FALSE(r.records[2].errors.empty());
  EXPECT_FALSE(r.records[1].anchors_sent.has_value());
  for (const auto& rec : r.records) EXPECT_TRUE(rec.correct);
  EXPECT_THROW(run_pipeline({}, replay, replay, prompts(), {}), Error);
}

class SlowServer {
 public:
  explicit SlowServer(int delay_ms) {
    server_.Post("/v1/complete", [delay_ms, this](const httplib::Request& req, httplib::Response& res) {
      last_body_ = req.body;
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
      res.set_content(R"({"text":"Answer: 10"})", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~SlowServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::string last_body() const { return last_body_; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::string last_body_;
};

TEST_F(RunnerFixture, RemoteBackend) {
  const auto dir = testkit::temp_dir("remote");
  std::ofstream((dir / "img.png").string()) << "PNGDATA";
  TrajectoryInstance inst = instances(Category::kRetrieval, 1)[0];
  inst.image = (dir / "img.png").string();

  SlowServer fast(0);
  RemoteBackend ok({fast.url(), "/v1/complete", 2000, 0});
  EXPECT_EQ(run_stage2(inst, std::string("[cell] (250,500)(437,749)"), ok, prompts()).answer, "10");
  const json sent = json::parse(fast.last_body());
  EXPECT_EQ(sent["stage"], 2);
  EXPECT_EQ(sent["image"], "UE5HREFUQQ==");
  EXPECT_EQ(sent["anchors"], "[cell] (250,500)(437,749)");

  SlowServer slow(600);
  RemoteBackend impatient({slow.url(), "/v1/complete", 100, 0});
  EXPECT_EQ(error_of([&] { run_stage2(inst, std::nullopt, impatient, prompts()); }), ErrorCode::kBackendTimeout);

  RemoteBackend nowhere({"http://127.0.0.1:1", "/v1/complete", 200, 1});
  EXPECT_EQ(error_of([&] { run_stage2(inst, std::nullopt, nowhere, prompts()); }), ErrorCode::kBackendError);
}

TEST(Trend, RankCorrelation) {
  const Trend up = correlate_runs({{"c", 0.7, 0.6}, {"a", 0.5, 0.4}, {"b", 0.6, 0.5}});
  EXPECT_EQ(up.points[0].name, "a");
  EXPECT_DOUBLE_EQ(up.rank_correlation, 1.0);
  EXPECT_DOUBLE_EQ(correlate_runs({{"a", 0.5, 0.6}, {"b", 0.6, 0.5}}).rank_correlation, -1.0);
  EXPECT_DOUBLE_EQ(correlate_runs({{"a", 0.5, 0.5}, {"b", 0.6, 0.5}}).rank_correlation, 0.0);
  EXPECT_EQ(error_of([] { correlate_runs({{"a", 0.5, 0.5}}); }), ErrorCode::kTooFewRuns);
}

}  // namespace
}  // namespace tableforge
