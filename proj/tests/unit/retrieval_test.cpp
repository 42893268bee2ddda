#include <gtest/gtest.h>

#include <string>

#include "brute_force.hpp"
#include "hmo/error.hpp"
#include "hmo/reference_ports.hpp"
#include "hmo/retrieval.hpp"
#include "stub_ports.hpp"

namespace hmo {
namespace {

constexpr UnixSeconds kT0 = 1'700'000'000;

RetrievalHit hit(const char* id, double sim) {
  RetrievalHit h;
  h.record_id = RecordId(id);
  h.similarity = sim;
  return h;
}

std::vector<std::string> ids_of(const std::vector<RetrievalHit>& hits) {
  std::vector<std::string> out;
  for (const auto& h : hits) out.push_back(h.record_id.str());
  return out;
}

TEST(MergeRanked, DedupesKeepsBestAndCuts) {
  const std::vector<RetrievalHit> a{hit("A", 0.9), hit("B", 0.5), hit("C", 0.4)};
  const std::vector<RetrievalHit> b{hit("B", 0.7), hit("D", 0.6), hit("E", 0.1)};
  const auto m = merge_ranked(a, b, 3);
  EXPECT_EQ(ids_of(m), (std::vector<std::string>{"A", "B", "D"}));
  EXPECT_EQ(m[1].similarity, 0.7);
  EXPECT_EQ(m[0].rank, 1);
  EXPECT_EQ(m[2].rank, 3);
}

TEST(MergeRanked, TiesGoToTheLargerId) {
  const std::vector<RetrievalHit> a{hit("A", 0.5)};
  const std::vector<RetrievalHit> b{hit("B", 0.5), hit("C", 0.2)};
  EXPECT_EQ(ids_of(merge_ranked(a, b, 5)), (std::vector<std::string>{"B", "A", "C"}));
  EXPECT_TRUE(merge_ranked({}, {}, 4).empty());
}

TEST(RetrievalMode, RoundTrip) {
  for (auto m : {RetrievalMode::kTiered, RetrievalMode::kNoTier1, RetrievalMode::kGlobal}) {
    EXPECT_EQ(retrieval_mode_from_string(to_string(m)), m);
  }
  EXPECT_THROW(retrieval_mode_from_string("flat"), Error);
}

class RetrievalFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    cfg_.sessions_cached = 2;
    cfg_.pivotal_k = 3;
    cfg_.buffer_h = 4;
    store_ = std::make_unique<TierStore>(cfg_, Ports::reference(cfg_));
    const char* topics[] = {"garden", "piano", "rocket", "harbor", "violin", "desert"};
    UnixSeconds t = kT0;
    for (int s = 0; s < 6; ++s) {
      for (int i = 0; i < 4; ++i) {
        const std::string q = std::string("tell me about the ") + topics[s] + " item " + std::to_string(i);
        const std::string a = std::string("the ") + topics[s] + " note number " + std::to_string(s * 10 + i);
        store_->ingest(q, a, t);
        oracle_.add_turn(q, a);
        t += 30;
      }
      t += cfg_.session_gap_seconds + 1;
    }
  }

  RetrievalReport run(std::string_view q, std::size_t k, RetrievalMode mode,
                      const SufficiencyJudge& judge) const {
    return retrieve(*store_, q, embedder_.embed(q), k, mode, judge);
  }

  EngineConfig cfg_;
  std::unique_ptr<TierStore> store_;
  HashingEmbedder embedder_{256};
  testing::BruteForce oracle_{256};
};

TEST_F(RetrievalFixture, GlobalMatchesBruteForce) {
  const HeuristicSufficiencyJudge judge(0.35, 1);
  for (const char* q : {"piano note", "what about the rocket item 2", "harbor 31", "zebra"}) {
    const auto r = run(q, 5, RetrievalMode::kGlobal, judge);
    const auto want = oracle_.top(q, 5);
    ASSERT_EQ(r.hits.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      EXPECT_EQ(r.hits[i].index, want[i].ordinal) << q << " rank " << i;
      EXPECT_NEAR(r.hits[i].similarity, want[i].similarity, 1e-12);
      EXPECT_EQ(r.hits[i].rank, static_cast<int>(i + 1));
    }
    EXPECT_EQ(r.tiers_searched, (std::vector<int>{1, 2, 3}));
    EXPECT_EQ(r.candidates_scanned, store_->size());
    EXPECT_TRUE(r.verdicts.empty());
  }
}

TEST_F(RetrievalFixture, SelfMatchRanksFirst) {
  const HeuristicSufficiencyJudge judge(0.35, 1);
  const std::string q = "tell me about the garden item 1";
  const std::string a = "the garden note number 1";
  const auto r = run(q + "\n" + a, 1, RetrievalMode::kGlobal, judge);
  ASSERT_EQ(r.hits.size(), 1u);
  EXPECT_EQ(r.hits[0].index, 1u);
  EXPECT_NEAR(r.hits[0].similarity, 1.0, 1e-6);
}

TEST_F(RetrievalFixture, SufficientTierOneStopsEarly) {
  const HeuristicSufficiencyJudge judge(-1.0, 1);
  const auto r = run("desert note", 3, RetrievalMode::kTiered, judge);
  EXPECT_EQ(r.tiers_searched, std::vector<int>{1});
  EXPECT_EQ(r.candidates_scanned, store_->tier1_indices().size());
  ASSERT_EQ(r.verdicts.size(), 1u);
  EXPECT_TRUE(r.verdicts[0].sufficient());
  for (const auto& h : r.hits) EXPECT_EQ(tier_number(h.placement_at_hit), 1);
}

TEST_F(RetrievalFixture, ForcedEscalationEqualsGlobal) {
  const testing::AlwaysDeeper deeper;
  const HeuristicSufficiencyJudge judge(0.35, 1);
  for (const char* q : {"garden item", "violin 42", "harbor note number 30"}) {
    const auto tiered = run(q, 6, RetrievalMode::kTiered, deeper);
    const auto global = run(q, 6, RetrievalMode::kGlobal, judge);
    EXPECT_EQ(tiered.tiers_searched, (std::vector<int>{1, 2, 3}));
    EXPECT_EQ(tiered.verdicts.size(), 2u);
    EXPECT_EQ(tiered.candidates_scanned, store_->size());
    EXPECT_EQ(ids_of(tiered.hits), ids_of(global.hits));
  }
}

TEST_F(RetrievalFixture, NoTier1StartsAtTheBuffer) {
  const HeuristicSufficiencyJudge stop(-1.0, 1);
  const auto r = run("piano", 3, RetrievalMode::kNoTier1, stop);
  EXPECT_EQ(r.tiers_searched, std::vector<int>{2});
  EXPECT_EQ(r.candidates_scanned, store_->tier2_indices().size());
  const testing::AlwaysDeeper deeper;
  const auto full = run("piano", 3, RetrievalMode::kNoTier1, deeper);
  EXPECT_EQ(full.tiers_searched, (std::vector<int>{2, 3}));
  EXPECT_EQ(full.candidates_scanned, store_->size());
  EXPECT_EQ(full.verdicts.size(), 1u);
}

TEST_F(RetrievalFixture, ScanNeverExceedsTheArchive) {
  const HeuristicSufficiencyJudge judge(0.35, 1);
  for (auto mode : {RetrievalMode::kTiered, RetrievalMode::kNoTier1, RetrievalMode::kGlobal}) {
    const auto r = run("rocket note number 22", 100, mode, judge);
    EXPECT_LE(r.candidates_scanned, store_->size());
    EXPECT_LE(r.hits.size(), store_->size());
    for (std::size_t i = 1; i < r.hits.size(); ++i) EXPECT_TRUE(hit_precedes(r.hits[i - 1], r.hits[i]));
  }
}

TEST_F(RetrievalFixture, RejectsBadArguments) {
  const HeuristicSufficiencyJudge judge(0.35, 1);
  try {
    retrieve(*store_, "  ", embedder_.embed("x"), 3, RetrievalMode::kTiered, judge);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyQuery);
  }
  EXPECT_THROW(run("x", 0, RetrievalMode::kTiered, judge), Error);
}

TEST(Retrieval, EmptyStoreGivesEmptyReport) {
  const EngineConfig cfg;
  const TierStore store(cfg, Ports::reference(cfg));
  const HeuristicSufficiencyJudge judge(0.35, 1);
  const auto r = retrieve(store, "hello", HashingEmbedder(256).embed("hello"), 5,
                          RetrievalMode::kTiered, judge);
  EXPECT_EQ(r, RetrievalReport{});
}

TEST(Retrieval, DuplicateTextPrefersTheNewerRecord) {
  const EngineConfig cfg;
  TierStore store(cfg, Ports::reference(cfg));
  const auto a = store.ingest("same words here", "", kT0);
  const auto b = store.ingest("same words here", "", kT0 + 1);
  const HeuristicSufficiencyJudge judge(0.35, 1);
  const auto r = retrieve(store, "same words", HashingEmbedder(256).embed("same words"), 2,
                          RetrievalMode::kGlobal, judge);
  ASSERT_EQ(r.hits.size(), 2u);
  EXPECT_EQ(r.hits[0].record_id, b.record_id);
  EXPECT_EQ(r.hits[1].record_id, a.record_id);
}

}  // namespace
}  // namespace hmo
