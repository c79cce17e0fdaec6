#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tableforge/app/cli.hpp"
#include "tableforge/app/corpus.hpp"
#include "tableforge/app/service.hpp"
#include "tableforge/verifier.hpp"
#include "testkit.hpp"

namespace tableforge::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t line_count(const fs::path& p) {
  std::istringstream in(testkit::read_file(p));
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

// Builds a small corpus on disk with one misaligned evidence box, then serves it.
class ServiceTest : public ::testing::Test {
 protected:
  fs::path dir;
  std::string corpus_dir;
  std::string bad_id;
  std::size_t bad_index = 0;
  BBox good_box{};
  std::unique_ptr<ReviewService> service;
  std::thread thread;

  void SetUp() override {
    dir = testkit::temp_dir(std::string("svc_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    const std::string spec = (testkit::data_dir() / "specs" / "fixture_a.json").string();
    const std::string assets = (dir / "assets").string();
    corpus_dir = (dir / "corpus").string();
    std::ostringstream out, err;
    ASSERT_EQ(run_cli({"render", "--specs", spec, "--out", assets}, out, err), kExitOk);
    ASSERT_EQ(run_cli({"forge", "--specs", spec, "--assets", assets, "--out", corpus_dir, "--quota", "retrieval=4",
                       "--seed", "3"},
                      out, err),
              kExitOk)
        << err.str();

    Corpus c = load_corpus(corpus_dir);
    TrajectoryInstance& bad = c.manifest.instances[1];
    bad_id = bad.id;
    good_box = bad.evidence[bad_index].bbox_px;
    const TableAsset& asset = c.tables.at(bad.table_id);
    bad.evidence[bad_index].bbox_px.x1 += 1;
    bad.evidence[bad_index].bbox_norm =
        normalize_bbox(bad.evidence[bad_index].bbox_px, asset.map.image_w(), asset.map.image_h());
    save_corpus(c);

    std::vector<Flag> flags;
    for (const auto& in : c.manifest.instances) {
      const auto f = verify_instance(in, c.tables.at(in.table_id));
      flags.insert(flags.end(), f.begin(), f.end());
    }
    write_flags((fs::path(corpus_dir) / kFlagsFile).string(), flags);

    service = std::make_unique<ReviewService>(load_corpus(corpus_dir), flags);
    ASSERT_TRUE(service->bind("127.0.0.1", 0));
    thread = std::thread([this] { service->run(); });
    service->wait_until_ready();
  }

  void TearDown() override {
    if (service) service->stop();
    if (thread.joinable()) thread.join();
  }

  httplib::Client client() {
    httplib::Client cli("127.0.0.1", service->port());
    cli.set_connection_timeout(5);
    cli.set_read_timeout(5);
    return cli;
  }

  httplib::Result post(const json& body) {
    return client().Post("/api/decisions", body.dump(), "application/json");
  }
};

TEST_F(ServiceTest, ListsFlagsAndInstances) {
  auto res = client().Get("/api/flags");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const json flags = json::parse(res->body);
  ASSERT_TRUE(flags.is_array());
  ASSERT_FALSE(flags.empty());
  for (const auto& f : flags) EXPECT_EQ(f["id"], bad_id);

  res = client().Get("/api/instances/" + bad_id);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const json body = json::parse(res->body);
  EXPECT_EQ(body["instance"]["id"], bad_id);
  EXPECT_TRUE(body.contains("region_map"));
  EXPECT_FALSE(body["flags"].empty());

  res = client().Get(body["image_url"].get<std::string>());
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body.substr(1, 3), "PNG");

  res = client().Get("/api/instances/no-such-id");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);

  res = client().Get("/api/stats");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
}

TEST_F(ServiceTest, ModifyClearsFlagsAndPersists) {
  const json patch = {{"evidence", json::array({{{"index", bad_index},
                                                {"bbox_px", {good_box.x1, good_box.y1, good_box.x2, good_box.y2}}}})}};
  auto res = post({{"id", bad_id}, {"action", "modify"}, {"reviewer", "r1"}, {"patch", patch}});
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  EXPECT_TRUE(json::parse(res->body)["flags"].empty());

  res = client().Get("/api/flags");
  ASSERT_TRUE(res);
  EXPECT_TRUE(json::parse(res->body).empty());
  EXPECT_EQ(line_count(fs::path(corpus_dir) / kAuditLogFile), 1u);
  const Corpus reloaded = load_corpus(corpus_dir);
  EXPECT_EQ(reloaded.manifest.instances[1].evidence[bad_index].bbox_px, good_box);
}

TEST_F(ServiceTest, DropRemovesTheLine) {
  ASSERT_EQ(line_count(fs::path(corpus_dir) / kTrajectoryFile), 4u);
  auto res = post({{"id", bad_id}, {"action", "drop"}});
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  EXPECT_EQ(line_count(fs::path(corpus_dir) / kTrajectoryFile), 3u);
  res = client().Get("/api/instances/" + bad_id);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
}

TEST_F(ServiceTest, RejectsBadDecisions) {
  auto res = post({{"id", "ghost"}, {"action", "accept"}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);

  res = client().Post("/api/decisions", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);

  res = post({{"id", bad_id}, {"action", "rewrite"}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);

  res = post({{"id", bad_id}, {"action", "modify"}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_FALSE(fs::exists(fs::path(corpus_dir) / kAuditLogFile));
}

TEST_F(ServiceTest, PortInUse) {
  ReviewService second(load_corpus(corpus_dir), {});
  EXPECT_FALSE(second.bind("127.0.0.1", service->port()));
  std::ostringstream out, err;
  EXPECT_EQ(run_cli({"serve", "--corpus", corpus_dir, "--port", std::to_string(service->port())}, out, err),
            kExitService);
}

}  // namespace
}  // namespace tableforge::app
