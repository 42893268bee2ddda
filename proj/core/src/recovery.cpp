#include "hmo/recovery.hpp"

#include <algorithm>

#include "hmo/config.hpp"
#include "hmo/error.hpp"
#include "hmo/scoring.hpp"

namespace hmo {

namespace {

MemoryHeader ingestion_header(const ArchiveRow& row, const EngineConfig& cfg) {
  MemoryHeader h;
  h.importance = std::clamp(row.importance, 1, 10);
  h.importance_fallback = row.importance_fallback;
  h.persona_sim = row.persona_sim_at_ingest;
  h.recall_count = 1;
  h.last_access = row.created_at;
  h.score_epoch = row.score_epoch;
  h.cached_score = priority_score(h, row.created_at, cfg).total;
  return h;
}

// Drops snapshot entries whose archive line was lost.
void drop_missing(std::vector<HeaderEntry>& entries, const TierStore& store,
                  std::vector<std::string>& warnings) {
  const auto keep = std::remove_if(entries.begin(), entries.end(), [&](const HeaderEntry& e) {
    if (store.contains(e.id)) return false;
    warnings.push_back("snapshot references missing record " + e.id.str());
    return true;
  });
  entries.erase(keep, entries.end());
}

}  // namespace

RecoveryReport recover(TierStore& store, const StorePaths& paths) {
  if (store.size() != 0) throw Error(ErrorCode::kInvalidArgument, "recover needs an empty store");
  const EngineConfig& cfg = store.config();

  std::optional<SnapshotFile> snapshot = load_latest_snapshot(paths);
  if (snapshot && snapshot->config_hash != config_hash(cfg)) {
    throw Error(ErrorCode::kConfigMismatch,
                "snapshot epoch " + std::to_string(snapshot->epoch) +
                    " was taken under a different configuration");
  }

  ArchiveScan scan = read_archive(paths, static_cast<std::size_t>(cfg.embed_dim));
  RecoveryReport report;
  report.corrupt_lines = scan.corrupt_lines;
  report.orphan_rows = scan.orphan_rows;
  report.orphan_embedding_rows = scan.orphan_embedding_rows;
  report.warnings = std::move(scan.warnings);

  bool applied = !snapshot.has_value();
  auto apply_snapshot = [&] {
    TierSnapshot state = snapshot->state;
    drop_missing(state.recency, store, report.warnings);
    drop_missing(state.pivotal, store, report.warnings);
    drop_missing(state.buffer, store, report.warnings);
    drop_missing(state.touched, store, report.warnings);
    store.restore_state(state);
    report.from_snapshot = true;
    report.snapshot_epoch = snapshot->epoch;
    applied = true;
  };

  for (auto& rec : scan.records) {
    EmbeddingVector embedding = EmbeddingVector::from_float_row(rec.embedding);
    const bool covered = snapshot && snapshot->state.last_id && !(*snapshot->state.last_id < rec.row.id);
    if (covered) {
      store.restore_record(rec.row.to_segment(std::move(embedding)), ingestion_header(rec.row, cfg),
                           rec.offset);
      ++report.rows_restored;
      continue;
    }
    if (!applied) apply_snapshot();
    store.replay_row(rec.row, std::move(embedding), rec.offset);
    ++report.rows_replayed;
  }
  if (!applied) apply_snapshot();
  if (scan.last_written_id) store.reserve_ids_through(*scan.last_written_id);
  report.last_written_id = scan.last_written_id;
  return report;
}

}  // namespace hmo
