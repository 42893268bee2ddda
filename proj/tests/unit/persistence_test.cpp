#include <gtest/gtest.h>

#include <fstream>

#include "hmo/error.hpp"
#include "hmo/recovery.hpp"
#include "hmo/reference_ports.hpp"
#include "hmo/storage.hpp"
#include "hmo/tier_store.hpp"
#include "temp_dir.hpp"

namespace hmo {
namespace {

constexpr UnixSeconds kT0 = 1'700'000'000;

EngineConfig test_config() {
  EngineConfig cfg;
  cfg.sessions_cached = 2;
  cfg.pivotal_k = 3;
  cfg.buffer_h = 3;
  cfg.embed_dim = 32;
  return cfg;
}

MemorySegment make_segment(std::uint64_t seq, const std::string& q) {
  MemorySegment s;
  s.id = new_segment_id(kT0, seq);
  s.session_id = "ses-x";
  s.query_text = q;
  s.answer_text = "answer to " + q;
  s.created_at = kT0;
  s.embedding = HashingEmbedder(32).embed(s.content());
  return s;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

void ingest_sessions(TierStore& store, int sessions, UnixSeconds& t) {
  for (int s = 0; s < sessions; ++s) {
    for (int i = 0; i < 3; ++i) {
      store.ingest("topic " + std::to_string(t % 97) + " question " + std::to_string(i),
                   "remember value " + std::to_string(t), t);
      t += 20;
    }
    t += 4000;
  }
}

TEST(ArchiveRow, JsonRoundTrip) {
  ArchiveRow row;
  row.id = new_segment_id(kT0, 7);
  row.session_id = "ses-1";
  row.kind = SegmentKind::kExtracted;
  row.text = "line one\n\"quoted\" \xc3\xa9";
  row.created_at = kT0;
  row.importance = 9;
  row.persona_sim_at_ingest = -0.123456789012345678;
  row.dim = 32;
  row.score_epoch = 4;
  row.importance_fallback = true;
  const auto back = ArchiveRow::parse(row.to_json_line());
  EXPECT_EQ(back.to_json_line(), row.to_json_line());
  EXPECT_EQ(back.persona_sim_at_ingest, row.persona_sim_at_ingest);
  EXPECT_TRUE(back.importance_fallback);
  EXPECT_EQ(back.text, row.text);
}

TEST(ArchiveRow, CorruptLines) {
  EXPECT_EQ(code_of([] { ArchiveRow::parse("{\"id\": 3"); }), ErrorCode::kCorruptLine);
  EXPECT_EQ(code_of([] { ArchiveRow::parse("{}"); }), ErrorCode::kCorruptLine);
  EXPECT_EQ(code_of([] {
              ArchiveRow::parse(R"({"id":"short","session_id":"s","kind":"raw","q":"","a":"x","text":"",)"
                                R"("created_at":1,"importance":5,"persona_sim_at_ingest":0,"dim":32})");
            }),
            ErrorCode::kCorruptLine);
}

TEST(ArchiveWriter, AppendsAndReadsBack) {
  testing::TempDir dir;
  const StorePaths paths{dir.path()};
  std::vector<MemorySegment> segs{make_segment(0, "first"), make_segment(1, "second"),
                                  make_segment(2, "third")};
  std::vector<std::uint64_t> offsets;
  {
    ArchiveWriter w(paths, 32, std::nullopt);
    for (const auto& s : segs) offsets.push_back(w.append(s, MemoryHeader{}, s.embedding.to_float_row()));
    EXPECT_EQ(w.archive_bytes(), fs::file_size(paths.archive()));
    EXPECT_EQ(w.embedding_rows(), 3u);
    EXPECT_EQ(code_of([&] { w.append(segs[1], MemoryHeader{}, segs[1].embedding.to_float_row()); }),
              ErrorCode::kIdOrderViolation);
  }
  EXPECT_EQ(offsets[0], 0u);
  EXPECT_LT(offsets[0], offsets[1]);

  const auto scan = read_archive(paths, 32);
  ASSERT_EQ(scan.records.size(), 3u);
  EXPECT_EQ(scan.corrupt_lines, 0u);
  EXPECT_EQ(scan.orphan_rows, 0u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(scan.records[i].row.id, segs[i].id);
    EXPECT_EQ(scan.records[i].offset, offsets[i]);
    EXPECT_EQ(scan.records[i].embedding, segs[i].embedding.to_float_row());
  }
  EXPECT_EQ(scan.last_written_id, segs[2].id);

  // Offsets point at the start of each line.
  std::ifstream in(paths.archive(), std::ios::binary);
  in.seekg(static_cast<std::streamoff>(offsets[1]));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(ArchiveRow::parse(line).id, segs[1].id);
}

TEST(ArchiveWriter, MissingStoreScansEmpty) {
  testing::TempDir dir;
  const auto scan = read_archive(StorePaths{dir.path() / "nothing"}, 32);
  EXPECT_TRUE(scan.records.empty());
  EXPECT_FALSE(scan.last_written_id);
}

TEST(ArchiveWriter, CrashAfterArchiveLineLeavesAnOrphan) {
  testing::TempDir dir;
  const StorePaths paths{dir.path()};
  const auto a = make_segment(0, "kept");
  const auto b = make_segment(1, "lost");
  {
    ArchiveWriter w(paths, 32, std::nullopt);
    w.append(a, MemoryHeader{}, a.embedding.to_float_row());
    w.inject_crash(CrashPoint::kAfterArchiveLine);
    EXPECT_EQ(code_of([&] { w.append(b, MemoryHeader{}, b.embedding.to_float_row()); }),
              ErrorCode::kIoFailure);
  }
  const auto scan = read_archive(paths, 32);
  EXPECT_EQ(scan.records.size(), 1u);
  EXPECT_EQ(scan.orphan_rows, 1u);
  EXPECT_EQ(scan.last_written_id, b.id);

  ArchiveWriter w(paths, 32, scan.last_written_id);
  EXPECT_EQ(code_of([&] { w.append(b, MemoryHeader{}, b.embedding.to_float_row()); }),
            ErrorCode::kIdOrderViolation);
  const auto c = make_segment(2, "after");
  w.append(c, MemoryHeader{}, c.embedding.to_float_row());
  const auto again = read_archive(paths, 32);
  ASSERT_EQ(again.records.size(), 2u);
  EXPECT_EQ(again.records[1].row.id, c.id);
  EXPECT_EQ(again.records[1].embedding, c.embedding.to_float_row());
}

TEST(ArchiveWriter, CrashAfterEmbeddingRowLeavesAnUnreferencedRow) {
  testing::TempDir dir;
  const StorePaths paths{dir.path()};
  const auto a = make_segment(0, "one");
  {
    ArchiveWriter w(paths, 32, std::nullopt);
    w.inject_crash(CrashPoint::kAfterEmbeddingRow);
    EXPECT_THROW(w.append(a, MemoryHeader{}, a.embedding.to_float_row()), Error);
  }
  const auto scan = read_archive(paths, 32);
  EXPECT_TRUE(scan.records.empty());
  EXPECT_EQ(scan.orphan_rows, 1u);
  EXPECT_EQ(scan.orphan_embedding_rows, 1u);

  ArchiveWriter w(paths, 32, scan.last_written_id);
  const auto b = make_segment(1, "two");
  w.append(b, MemoryHeader{}, b.embedding.to_float_row());
  const auto again = read_archive(paths, 32);
  ASSERT_EQ(again.records.size(), 1u);
  EXPECT_EQ(again.records[0].embedding, b.embedding.to_float_row());
}

TEST(ArchiveWriter, TornTailIsClosedOff) {
  testing::TempDir dir;
  const StorePaths paths{dir.path()};
  const auto a = make_segment(0, "whole");
  {
    ArchiveWriter w(paths, 32, std::nullopt);
    w.append(a, MemoryHeader{}, a.embedding.to_float_row());
  }
  {
    std::ofstream(paths.archive(), std::ios::app) << "{\"id\":\"01";
    std::ofstream(paths.embeddings(), std::ios::app | std::ios::binary) << "abc";
    std::ofstream(paths.embedding_index(), std::ios::app) << "{\"id\":";
  }
  auto scan = read_archive(paths, 32);
  EXPECT_EQ(scan.records.size(), 1u);
  EXPECT_EQ(scan.corrupt_lines, 2u);

  ArchiveWriter w(paths, 32, scan.last_written_id);
  const auto b = make_segment(1, "next");
  w.append(b, MemoryHeader{}, b.embedding.to_float_row());
  scan = read_archive(paths, 32);
  ASSERT_EQ(scan.records.size(), 2u);
  EXPECT_EQ(scan.records[1].row.id, b.id);
  EXPECT_EQ(scan.records[1].embedding, b.embedding.to_float_row());
}

TEST(ArchiveWriter, DimensionMismatchIsFatal) {
  testing::TempDir dir;
  const StorePaths paths{dir.path()};
  const auto a = make_segment(0, "x");
  {
    ArchiveWriter w(paths, 32, std::nullopt);
    EXPECT_EQ(code_of([&] { w.append(a, MemoryHeader{}, std::vector<float>(8, 0.5f)); }),
              ErrorCode::kDimensionMismatch);
    w.append(a, MemoryHeader{}, a.embedding.to_float_row());
  }
  EXPECT_EQ(code_of([&] { read_archive(paths, 16); }), ErrorCode::kDimensionMismatch);
}

TEST(Snapshot, RoundTripAndLatest) {
  testing::TempDir dir;
  const StorePaths paths{dir.path()};
  EXPECT_FALSE(load_latest_snapshot(paths));
  EXPECT_EQ(latest_snapshot_epoch(paths), 0u);

  SnapshotFile snap;
  snap.epoch = 2;
  snap.taken_at = kT0;
  snap.config_hash = 0xfeedfacecafebeefull;
  MemoryHeader h;
  h.importance = 8;
  h.persona_sim = 0.1234567890123456789;
  h.recall_count = 12;
  h.last_access = kT0 - 5;
  h.cached_score = 17.000000000000004;
  h.score_epoch = 3;
  snap.state.recency_sessions = {"ses-b", "ses-a"};
  snap.state.pivotal = {{new_segment_id(kT0, 1), h}};
  snap.state.touched = {{new_segment_id(kT0, 0), h}};
  snap.state.persona.profile_text = "tea";
  snap.state.persona.vector = HashingEmbedder(32).embed("tea");
  snap.state.score_epoch = 3;
  snap.state.last_id = new_segment_id(kT0, 1);
  snap.state.current_session = "ses-b";
  snap.state.last_ingest_at = kT0;
  snap.state.next_session_sequence = 2;
  write_snapshot(paths, snap);
  snap.epoch = 1;
  write_snapshot(paths, snap);

  const auto loaded = load_latest_snapshot(paths);
  ASSERT_TRUE(loaded);
  EXPECT_EQ(loaded->epoch, 2u);
  EXPECT_EQ(loaded->config_hash, snap.config_hash);
  EXPECT_EQ(loaded->taken_at, kT0);
  EXPECT_EQ(loaded->state, snap.state);
  EXPECT_EQ(latest_snapshot_epoch(paths), 2u);

  std::ofstream(paths.snapshot(3)) << "{not json";
  EXPECT_EQ(code_of([&] { load_latest_snapshot(paths); }), ErrorCode::kCorruptLine);
}

TEST(Config, FileRoundTrip) {
  testing::TempDir dir;
  const StorePaths paths{dir.path()};
  EXPECT_FALSE(read_config(paths));
  const auto cfg = test_config();
  write_config(paths, cfg);
  EXPECT_EQ(read_config(paths), cfg);
}

class RecoveryTest : public ::testing::Test {
 protected:
  std::unique_ptr<TierStore> open_store() {
    auto writer = std::make_unique<ArchiveWriter>(paths_, 32, std::nullopt);
    auto store = std::make_unique<TierStore>(cfg_, Ports::reference(cfg_), writer.get());
    report_ = recover(*store, paths_);
    writer->set_last_id(report_.last_written_id);
    writers_.push_back(std::move(writer));
    return store;
  }

  void snapshot(const TierStore& store, std::uint64_t epoch) {
    write_snapshot(paths_, SnapshotFile{epoch, kT0, config_hash(cfg_), store.export_state()});
  }

  testing::TempDir dir_;
  StorePaths paths_{dir_.path()};
  EngineConfig cfg_ = test_config();
  RecoveryReport report_;
  std::vector<std::unique_ptr<ArchiveWriter>> writers_;
};

TEST_F(RecoveryTest, ColdReplayRebuildsTheSameState) {
  UnixSeconds t = kT0;
  TierSnapshot original;
  TierStats stats;
  {
    auto store = open_store();
    ingest_sessions(*store, 5, t);
    original = store->export_state();
    stats = store->tier_stats();
  }
  auto store = open_store();
  EXPECT_FALSE(report_.from_snapshot);
  EXPECT_EQ(report_.rows_replayed, 15u);
  EXPECT_EQ(store->export_state(), original);
  EXPECT_EQ(store->tier_stats(), stats);
}

TEST_F(RecoveryTest, SnapshotPlusTailReplay) {
  UnixSeconds t = kT0;
  TierSnapshot original;
  {
    auto store = open_store();
    ingest_sessions(*store, 3, t);
    store->on_access(store->segment(0).id, t);
    store->on_access(store->segment(4).id, t + 1);
    snapshot(*store, 1);
    ingest_sessions(*store, 2, t);
    original = store->export_state();
  }
  auto store = open_store();
  EXPECT_TRUE(report_.from_snapshot);
  EXPECT_EQ(report_.snapshot_epoch, 1u);
  EXPECT_EQ(report_.rows_restored, 9u);
  EXPECT_EQ(report_.rows_replayed, 6u);
  EXPECT_EQ(store->export_state(), original);
  EXPECT_EQ(store->header(store->segment(0).id).recall_count, 2);

  // New ids continue above everything recovered.
  const auto r = store->ingest("fresh", "turn", t + 10);
  EXPECT_LT(original.last_id, r.record_id);
}

TEST_F(RecoveryTest, OrphanIdIsNeverReused) {
  UnixSeconds t = kT0;
  RecordId lost;
  {
    auto store = open_store();
    ingest_sessions(*store, 1, t);
    writers_.back()->inject_crash(CrashPoint::kAfterArchiveLine);
    EXPECT_THROW(store->ingest("doomed", "turn", t), Error);
    lost = *writers_.back()->last_id();
  }
  auto store = open_store();
  EXPECT_EQ(store->size(), 3u);
  EXPECT_EQ(report_.orphan_rows, 1u);
  EXPECT_EQ(report_.last_written_id, lost);
  const auto r = store->ingest("again", "turn", t + 1);
  EXPECT_LT(lost, r.record_id);
}

TEST_F(RecoveryTest, SnapshotUnderAnotherConfigIsRejected) {
  UnixSeconds t = kT0;
  {
    auto store = open_store();
    ingest_sessions(*store, 1, t);
    snapshot(*store, 1);
  }
  cfg_.lambda = 2e-5;
  EXPECT_EQ(code_of([&] { open_store(); }), ErrorCode::kConfigMismatch);
}

TEST_F(RecoveryTest, NeedsAnEmptyStore) {
  TierStore store(cfg_, Ports::reference(cfg_));
  store.ingest("x", "y", kT0);
  EXPECT_EQ(code_of([&] { recover(store, paths_); }), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace hmo
