#include <gtest/gtest.h>

#include <atomic>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "hmo/error.hpp"
#include "hmo/reference_ports.hpp"
#include "hmo/remote_ports.hpp"

namespace hmo {
namespace {

using nlohmann::json;

// A local stand-in for an OpenAI-compatible server.
class MockModelServer {
 public:
  MockModelServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mutex_);
      ++chat_calls_;
      last_prompt_ = json::parse(req.body).at("messages").at(0).at("content").get<std::string>();
      last_auth_ = req.get_header_value("Authorization");
      res.status = chat_status_;
      res.set_content(json{{"choices", {{{"message", {{"role", "assistant"}, {"content", chat_reply_}}}}}}}.dump(),
                      "application/json");
    });
    server_.Post("/v1/embeddings", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(mutex_);
      res.set_content(json{{"data", {{{"embedding", embedding_}}}}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockModelServer() {
    server_.stop();
    thread_.join();
  }

  RemoteEndpoint endpoint() const {
    RemoteEndpoint e;
    e.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    e.model = "mock";
    e.api_key = "secret";
    e.timeout_seconds = 5;
    return e;
  }

  void reply(std::string text, int status = 200) {
    std::lock_guard lock(mutex_);
    chat_reply_ = std::move(text);
    chat_status_ = status;
  }
  void embedding(std::vector<double> v) {
    std::lock_guard lock(mutex_);
    embedding_ = std::move(v);
  }
  int chat_calls() {
    std::lock_guard lock(mutex_);
    return chat_calls_;
  }
  std::string last_prompt() {
    std::lock_guard lock(mutex_);
    return last_prompt_;
  }
  std::string last_auth() {
    std::lock_guard lock(mutex_);
    return last_auth_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
  std::mutex mutex_;
  std::string chat_reply_ = "Score: 7";
  int chat_status_ = 200;
  int chat_calls_ = 0;
  std::string last_prompt_;
  std::string last_auth_;
  std::vector<double> embedding_{3.0, 4.0};
};

MemorySegment segment() {
  MemorySegment s;
  s.id = new_segment_id(10, 1);
  s.query_text = "Where do I keep the spare key?";
  s.answer_text = "Under the blue pot.";
  s.created_at = 10;
  s.embedding = HashingEmbedder(8).embed(s.content());
  return s;
}

TEST(ParseImportanceReply, Forms) {
  EXPECT_EQ(parse_importance_reply("Score: 8"), 8);
  EXPECT_EQ(parse_importance_reply("score:[9]"), 9);
  EXPECT_EQ(parse_importance_reply("Reasoning... SCORE : 3\nbecause"), 3);
  EXPECT_EQ(parse_importance_reply("I would say 6 out of 10"), 6);
  EXPECT_EQ(parse_importance_reply("Score: 42"), 10);
  EXPECT_EQ(parse_importance_reply("Score: 0"), 1);
  EXPECT_EQ(parse_importance_reply("Score: -4"), 1);
  EXPECT_EQ(parse_importance_reply("Score: 99999999999999999999999"), 10);
  EXPECT_EQ(parse_importance_reply("no number here"), std::nullopt);
}

TEST(RemoteImportance, ParsesModelReply) {
  MockModelServer mock;
  mock.reply("Reasoning: core preference.\nScore: 9");
  const RemoteImportanceEvaluator eval(mock.endpoint());
  PersonaState persona;
  persona.profile_text = "likes gardening";
  const auto r = eval.evaluate(segment(), persona);
  EXPECT_EQ(r.score, 9);
  EXPECT_FALSE(r.fallback);
  EXPECT_NE(mock.last_prompt().find("likes gardening"), std::string::npos);
  EXPECT_NE(mock.last_prompt().find("Under the blue pot."), std::string::npos);
  EXPECT_EQ(mock.last_auth(), "Bearer secret");
}

TEST(RemoteImportance, RetriesOnceThenFallsBack) {
  MockModelServer mock;
  mock.reply("unsure");
  const RemoteImportanceEvaluator eval(mock.endpoint());
  const auto r = eval.evaluate(segment(), PersonaState{});
  EXPECT_EQ(r.score, kFallbackImportance);
  EXPECT_TRUE(r.fallback);
  EXPECT_EQ(mock.chat_calls(), 2);
}

TEST(RemoteImportance, ServerErrorFallsBack) {
  MockModelServer mock;
  mock.reply("Score: 9", 500);
  const auto r = RemoteImportanceEvaluator(mock.endpoint()).evaluate(segment(), PersonaState{});
  EXPECT_TRUE(r.fallback);
  EXPECT_EQ(r.score, 5);
}

TEST(RemoteImportance, UnreachableServerFallsBack) {
  RemoteEndpoint dead;
  dead.base_url = "http://127.0.0.1:1/v1";
  dead.timeout_seconds = 1;
  const auto r = RemoteImportanceEvaluator(dead).evaluate(segment(), PersonaState{});
  EXPECT_TRUE(r.fallback);
}

TEST(RemoteJudge, TriggerTokenMeansDeeper) {
  MockModelServer mock;
  const auto fallback = std::make_shared<HeuristicSufficiencyJudge>(0.35, 1);
  const RemoteSufficiencyJudge judge(mock.endpoint(), fallback);
  const auto seg = segment();
  const std::vector<JudgedHit> hits{{&seg, 0.2}};
  mock.reply("Not enough. <SEARCH_DEEPER>");
  auto v = judge.judge({"spare key?", nullptr, hits});
  EXPECT_EQ(v.kind, VerdictKind::kNeedsDeeperSearch);
  EXPECT_EQ(v.source, VerdictSource::kRemote);
  mock.reply("The memories answer it.");
  v = judge.judge({"spare key?", nullptr, hits});
  EXPECT_TRUE(v.sufficient());
  EXPECT_NE(mock.last_prompt().find("spare key?"), std::string::npos);
}

TEST(RemoteJudge, FallsBackToHeuristic) {
  MockModelServer mock;
  mock.reply("", 503);
  const RemoteSufficiencyJudge judge(mock.endpoint(), std::make_shared<HeuristicSufficiencyJudge>(0.35, 1));
  const std::vector<JudgedHit> hits{{nullptr, 0.9}};
  const auto v = judge.judge({"q", nullptr, hits});
  EXPECT_TRUE(v.sufficient());
  EXPECT_EQ(v.source, VerdictSource::kHeuristic);
}

TEST(RemoteCompressor, ReturnsNoteOrPortFailure) {
  MockModelServer mock;
  mock.reply("  Key under blue pot.  ");
  const RemoteCompressor c(mock.endpoint());
  EXPECT_EQ(c.compress(segment()), "Key under blue pot.");
  mock.reply("x", 500);
  try {
    c.compress(segment());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPortFailure);
  }
}

TEST(RemoteEmbedder, NormalizesAndChecksDimension) {
  MockModelServer mock;
  mock.embedding({3.0, 4.0});
  const RemoteEmbedder e(mock.endpoint(), 2);
  const auto v = e.embed("text");
  EXPECT_DOUBLE_EQ(v.values()[0], 0.6);
  EXPECT_DOUBLE_EQ(v.values()[1], 0.8);
  EXPECT_THROW(RemoteEmbedder(mock.endpoint(), 3).embed("text"), Error);
  EXPECT_THROW(e.embed("  "), Error);
}

TEST(RemotePersona, RewritesTextAndKeepsVectorUpdate) {
  MockModelServer mock;
  mock.reply("Keeps a spare key under a blue pot.");
  const RemotePersonaUpdater up(mock.endpoint());
  const auto p = up.update(PersonaState{}, segment());
  EXPECT_EQ(p.profile_text, "Keeps a spare key under a blue pot.");
  EXPECT_EQ(p.vector, segment().embedding);
  mock.reply("", 500);
  const auto q = up.update(PersonaState{}, segment());
  EXPECT_EQ(q.profile_text, EmaPersonaUpdater().update(PersonaState{}, segment()).profile_text);
}

TEST(RemoteEndpoint, FromEnvironment) {
  ::unsetenv("HMOTEST_BASE_URL");
  EXPECT_FALSE(RemoteEndpoint::from_env("HMOTEST").has_value());
  ::setenv("HMOTEST_BASE_URL", "http://h:1/v1", 1);
  ::setenv("HMOTEST_MODEL", "m", 1);
  ::setenv("HMOTEST_TIMEOUT", "3", 1);
  const auto e = RemoteEndpoint::from_env("HMOTEST");
  ASSERT_TRUE(e.has_value());
  EXPECT_EQ(e->base_url, "http://h:1/v1");
  EXPECT_EQ(e->model, "m");
  EXPECT_EQ(e->timeout_seconds, 3);
}

}  // namespace
}  // namespace hmo
