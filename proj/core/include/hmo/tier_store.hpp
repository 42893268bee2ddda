#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hmo/config.hpp"
#include "hmo/model.hpp"
#include "hmo/ports.hpp"
#include "hmo/storage.hpp"

namespace hmo {

// Tier membership. Tier 3 is implicit: every archived record not listed here
// and not in a recency session.
struct TierIndex {
  std::vector<SessionId> recency_sessions;  // most recent first, <= S
  std::vector<RecordId> pivotal_ids;        // rank order, <= K
  std::vector<RecordId> buffer_ids;         // rank order, <= H

  friend bool operator==(const TierIndex&, const TierIndex&) = default;
};

struct ScoreRange {
  double min = 0.0;
  double max = 0.0;

  friend bool operator==(const ScoreRange&, const ScoreRange&) = default;
};

struct TierStats {
  std::size_t recency = 0;
  std::size_t pivotal = 0;
  std::size_t buffer = 0;
  std::size_t archive_only = 0;
  std::size_t archive_size = 0;
  std::size_t recency_sessions = 0;
  std::optional<ScoreRange> recency_scores;
  std::optional<ScoreRange> pivotal_scores;
  std::optional<ScoreRange> buffer_scores;
  std::optional<ScoreRange> archive_scores;
  std::uint64_t score_epoch = 0;

  friend bool operator==(const TierStats&, const TierStats&) = default;
};

struct IngestResult {
  RecordId record_id;
  SessionId session_id;
  Placement placement = Placement::kTier3Archive;
  int importance = 0;
  SegmentKind kind = SegmentKind::kRaw;
  bool rescored = false;  // the drift gate fired during this ingest
};

// Owns the archive records, their headers and the tier index. Tiers are index
// sets over the archive: promotion and demotion never move record data.
//
// Not internally synchronized; Engine serializes writers.
class TierStore {
 public:
  /// `writer` may be null for an in-memory store.
  TierStore(EngineConfig cfg, Ports ports, ArchiveWriter* writer = nullptr);

  /// Starts a new session, makes it current and pushes it to the front of
  /// the recency list. Sessions pushed past S lose recency membership and
  /// their records compete on score.
  SessionId begin_session(UnixSeconds now);

  /// Captures one interaction. Port calls and the archive append happen
  /// before any in-memory state changes, so a failure leaves the store as it
  /// was. Throws kEmptyInteraction, kUnknownSession, kInvalidArgument (now <
  /// 0) or whatever a port raises.
  IngestResult ingest(std::string_view query, std::string_view answer, UnixSeconds now,
                      std::optional<SessionId> session = std::nullopt);

  /// Re-ranks the candidate pool into pivotal (top K) and buffer (next H);
  /// everything else reverts to the archive.
  TierIndex rebalance(UnixSeconds now);

  /// Access refresh of one record, including the lazy rescore of an archive
  /// record, followed by a rebalance. Throws kUnknownRecord.
  Placement on_access(const RecordId& id, UnixSeconds now);

  /// Runs the drift gate and, if it fires, rescores Tier 1 and Tier 2.
  bool apply_drift_gate(UnixSeconds now);

  /// Unconditional rescore cycle plus rebalance.
  void force_rescore(UnixSeconds now);

  TierStats tier_stats() const;

  // Persona
  const PersonaState& persona() const noexcept { return persona_; }
  /// New profile text; the vector is re-embedded. The anchor is untouched,
  /// so the drift gate decides at the next mutation whether to rescore.
  void set_persona_profile(std::string text, UnixSeconds now);
  /// Replaces the persona vector only, keeping the anchor.
  void set_persona_vector(EmbeddingVector vector);

  // Read access
  const EngineConfig& config() const noexcept { return cfg_; }
  const Ports& ports() const noexcept { return ports_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool contains(const RecordId& id) const;
  std::size_t index_of(const RecordId& id) const;  // throws kUnknownRecord
  const MemorySegment& segment(std::size_t index) const { return records_.at(index).segment; }
  const MemoryHeader& header(std::size_t index) const { return records_.at(index).header; }
  const MemoryHeader& header(const RecordId& id) const { return header(index_of(id)); }
  Placement placement(std::size_t index) const { return placement_.at(index); }
  Placement placement(const RecordId& id) const { return placement(index_of(id)); }
  std::uint64_t archive_offset(std::size_t index) const { return records_.at(index).offset; }
  /// True once the header differs from its ingestion-time value.
  bool touched(std::size_t index) const { return records_.at(index).touched; }
  std::uint64_t score_epoch() const noexcept { return score_epoch_; }
  const std::optional<SessionId>& current_session() const noexcept { return current_session_; }
  TierIndex index() const;

  /// Record indices of Tier 1 (recency records in session order, then
  /// pivotal) and Tier 2.
  std::vector<std::size_t> tier1_indices() const;
  std::vector<std::size_t> tier2_indices() const;
  std::vector<std::size_t> recency_indices() const;
  const std::vector<std::size_t>& pivotal_indices() const noexcept { return pivotal_; }
  const std::vector<std::size_t>& buffer_indices() const noexcept { return buffer_; }

  // Recovery
  TierSnapshot export_state() const;
  /// Adds an archived record verbatim, without running any ingest logic.
  void restore_record(MemorySegment segment, const MemoryHeader& header,
                      std::uint64_t offset);
  /// Applies snapshot tier membership and headers to restored records.
  void restore_state(const TierSnapshot& state);
  /// Re-ingests an archived row that the snapshot does not cover: the stored
  /// importance and ingest-time similarity are kept, C_m restarts at 1 and
  /// t_last at created_at.
  void replay_row(const ArchiveRow& row, EmbeddingVector embedding, std::uint64_t offset);
  /// Keeps new ids above `id`, e.g. an orphaned archive line.
  void reserve_ids_through(const RecordId& id) { consume_id(id); }

 private:
  struct StoredRecord {
    MemorySegment segment;
    MemoryHeader header;
    std::uint64_t offset = 0;
    bool touched = false;
  };

  SessionId make_session_id(UnixSeconds now) const;
  void activate_session(const SessionId& id);
  void append_record(StoredRecord record);
  void evict_stale_sessions();
  void rebalance_pool();
  void consume_id(const RecordId& id);
  void note_session_id(const SessionId& id);
  void rescore(UnixSeconds now);
  bool in_recency(const SessionId& session) const;
  bool ranks_before(std::size_t a, std::size_t b) const;

  EngineConfig cfg_;
  Ports ports_;
  ArchiveWriter* writer_;

  std::vector<StoredRecord> records_;
  std::vector<Placement> placement_;
  std::unordered_map<RecordId, std::size_t> by_id_;
  std::unordered_map<SessionId, std::vector<std::size_t>> session_members_;

  std::deque<SessionId> recency_sessions_;
  std::vector<std::size_t> pivotal_;
  std::vector<std::size_t> buffer_;
  std::vector<std::size_t> pending_;  // candidates waiting for the next rebalance

  PersonaState persona_;
  std::uint64_t score_epoch_ = 0;
  std::optional<SessionId> current_session_;
  std::optional<UnixSeconds> last_ingest_at_;
  std::uint64_t next_sequence_ = 0;
  UnixSeconds last_id_time_ = 0;
  std::uint64_t next_session_sequence_ = 0;
};

}  // namespace hmo
