#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmo/config.hpp"
#include "hmo/model.hpp"

namespace hmo {

namespace fs = std::filesystem;

// File layout of a store directory.
struct StorePaths {
  fs::path dir;

  fs::path archive() const { return dir / "archive.jsonl"; }
  fs::path embeddings() const { return dir / "embeddings.bin"; }
  fs::path embedding_index() const { return dir / "embeddings.idx.jsonl"; }
  fs::path snapshots() const { return dir / "snapshots"; }
  fs::path config() const { return dir / "config.json"; }
  fs::path snapshot(std::uint64_t epoch) const;
};

// One line of archive.jsonl. Everything needed to rebuild the ingestion-time
// header is here; later header changes live in snapshots.
struct ArchiveRow {
  RecordId id;
  SessionId session_id;
  SegmentKind kind = SegmentKind::kRaw;
  std::string q;
  std::string a;
  std::string text;
  UnixSeconds created_at = 0;
  int importance = kDefaultImportance;
  double persona_sim_at_ingest = 0.0;
  std::size_t dim = 0;
  std::uint64_t score_epoch = 0;
  bool importance_fallback = false;

  static constexpr int kDefaultImportance = 5;

  static ArchiveRow from(const MemorySegment& segment, const MemoryHeader& header);
  MemorySegment to_segment(EmbeddingVector embedding) const;
  std::string to_json_line() const;
  /// Throws kCorruptLine.
  static ArchiveRow parse(std::string_view line);
};

// Test hook: stop an append part-way, as a crash would.
enum class CrashPoint { kNone, kAfterArchiveLine, kAfterEmbeddingRow };

// Appends records to the three archive files. The index line goes last, so a
// record is only visible to recovery once all three writes completed.
class ArchiveWriter {
 public:
  /// `last_id` is the largest id already in the archive, orphans included.
  /// Partial trailing lines and rows are closed off so new appends start on
  /// a clean boundary; existing bytes are never modified.
  ArchiveWriter(StorePaths paths, std::size_t dim, std::optional<RecordId> last_id);

  /// Returns the byte offset of the record's archive line. Throws
  /// kIdOrderViolation if the id does not exceed every id written so far and
  /// kIoFailure if a write fails.
  std::uint64_t append(const MemorySegment& segment, const MemoryHeader& header,
                       std::span<const float> embedding_row);

  const std::optional<RecordId>& last_id() const noexcept { return last_id_; }
  void set_last_id(std::optional<RecordId> id) { last_id_ = std::move(id); }
  std::uint64_t archive_bytes() const noexcept { return archive_bytes_; }
  std::uint64_t embedding_rows() const noexcept { return embedding_rows_; }

  void inject_crash(CrashPoint point) noexcept { crash_ = point; }

 private:
  StorePaths paths_;
  std::size_t dim_;
  std::ofstream archive_;
  std::ofstream embeddings_;
  std::ofstream index_;
  std::uint64_t archive_bytes_ = 0;
  std::uint64_t embedding_rows_ = 0;
  std::optional<RecordId> last_id_;
  CrashPoint crash_ = CrashPoint::kNone;
};

struct ArchivedRecord {
  ArchiveRow row;
  std::vector<float> embedding;
  std::uint64_t offset = 0;
};

struct ArchiveScan {
  std::vector<ArchivedRecord> records;  // id order
  std::size_t corrupt_lines = 0;
  // Archive lines whose index entry or embedding row never made it to disk.
  std::size_t orphan_rows = 0;
  // Embedding rows no index line points at.
  std::size_t orphan_embedding_rows = 0;
  std::optional<RecordId> last_written_id;  // includes orphans
  std::vector<std::string> warnings;
};

/// Reads every complete record; corrupt or orphaned entries are skipped and
/// counted. A missing store yields an empty scan.
ArchiveScan read_archive(const StorePaths& paths, std::size_t dim);

struct HeaderEntry {
  RecordId id;
  MemoryHeader header;

  friend bool operator==(const HeaderEntry&, const HeaderEntry&) = default;
};

// Tier-store state captured by a snapshot.
struct TierSnapshot {
  std::vector<SessionId> recency_sessions;  // most recent first
  std::vector<HeaderEntry> recency;         // headers of recency-session records
  std::vector<HeaderEntry> pivotal;         // rank order
  std::vector<HeaderEntry> buffer;          // rank order
  std::vector<HeaderEntry> touched;         // archive-only records changed since ingest
  PersonaState persona;
  std::uint64_t score_epoch = 0;
  std::optional<RecordId> last_id;
  std::optional<SessionId> current_session;
  std::optional<UnixSeconds> last_ingest_at;
  std::uint64_t next_session_sequence = 0;

  friend bool operator==(const TierSnapshot&, const TierSnapshot&) = default;
};

struct SnapshotFile {
  std::uint64_t epoch = 0;
  UnixSeconds taken_at = 0;
  std::uint64_t config_hash = 0;
  TierSnapshot state;
};

/// Writes snapshots/epoch-<n>.json through a temporary file and a rename.
void write_snapshot(const StorePaths& paths, const SnapshotFile& snapshot);

/// Highest-epoch snapshot on disk, if any. Throws kCorruptLine if it cannot
/// be parsed.
std::optional<SnapshotFile> load_latest_snapshot(const StorePaths& paths);

/// Epoch of the newest snapshot file, 0 when there is none.
std::uint64_t latest_snapshot_epoch(const StorePaths& paths);

/// Writes config.json (canonical form).
void write_config(const StorePaths& paths, const EngineConfig& cfg);
std::optional<EngineConfig> read_config(const StorePaths& paths);

}  // namespace hmo
