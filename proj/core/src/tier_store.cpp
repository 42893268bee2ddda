#include "hmo/tier_store.hpp"

#include <algorithm>

#include "hmo/error.hpp"
#include "hmo/reference_ports.hpp"
#include "hmo/scoring.hpp"

namespace hmo {

namespace {

constexpr std::string_view kSessionPrefix = "ses-";

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

void widen(std::optional<ScoreRange>& range, double score) {
  if (!range) {
    range = ScoreRange{score, score};
  } else {
    range->min = std::min(range->min, score);
    range->max = std::max(range->max, score);
  }
}

}  // namespace

TierStore::TierStore(EngineConfig cfg, Ports ports, ArchiveWriter* writer)
    : cfg_(std::move(cfg)), ports_(std::move(ports)), writer_(writer) {
  cfg_.validate();
  if (!ports_.embedder || !ports_.importance || !ports_.compressor || !ports_.judge ||
      !ports_.persona) {
    throw Error(ErrorCode::kInvalidArgument, "every port must be provided");
  }
  if (ports_.embedder->dimension() != static_cast<std::size_t>(cfg_.embed_dim)) {
    throw Error(ErrorCode::kDimensionMismatch, "embedder dimension differs from embed_dim");
  }
  persona_.ema_rate = cfg_.persona_ema_rate;
}

SessionId TierStore::make_session_id(UnixSeconds now) const {
  return std::string(kSessionPrefix) + new_segment_id(now, next_session_sequence_).str();
}

void TierStore::note_session_id(const SessionId& id) {
  if (!id.starts_with(kSessionPrefix)) return;
  try {
    const auto [t, seq] = decode_segment_id(RecordId(id.substr(kSessionPrefix.size())));
    next_session_sequence_ = std::max(next_session_sequence_, seq + 1);
  } catch (const Error&) {
    // Foreign session names carry no sequence.
  }
}

void TierStore::consume_id(const RecordId& id) {
  const auto [t, seq] = decode_segment_id(id);
  next_sequence_ = std::max(next_sequence_, seq + 1);
  last_id_time_ = std::max(last_id_time_, t);
}

bool TierStore::in_recency(const SessionId& session) const {
  return std::find(recency_sessions_.begin(), recency_sessions_.end(), session) !=
         recency_sessions_.end();
}

void TierStore::activate_session(const SessionId& id) {
  session_members_.try_emplace(id);
  recency_sessions_.push_front(id);
  evict_stale_sessions();
}

void TierStore::evict_stale_sessions() {
  const auto cap = static_cast<std::size_t>(cfg_.sessions_cached);
  while (recency_sessions_.size() > cap) {
    const SessionId evicted = recency_sessions_.back();
    recency_sessions_.pop_back();
    for (std::size_t i : session_members_[evicted]) {
      placement_[i] = Placement::kTier3Archive;
      pending_.push_back(i);
    }
  }
}

SessionId TierStore::begin_session(UnixSeconds now) {
  SessionId id = make_session_id(now);
  ++next_session_sequence_;
  activate_session(id);
  current_session_ = id;
  last_ingest_at_ = now;
  rebalance_pool();
  return id;
}

void TierStore::append_record(StoredRecord record) {
  const std::size_t i = records_.size();
  const bool recent = in_recency(record.segment.session_id);
  by_id_.emplace(record.segment.id, i);
  session_members_[record.segment.session_id].push_back(i);
  records_.push_back(std::move(record));
  placement_.push_back(recent ? Placement::kTier1Recency : Placement::kTier3Archive);
  if (!recent) pending_.push_back(i);
}

IngestResult TierStore::ingest(std::string_view query, std::string_view answer, UnixSeconds now,
                               std::optional<SessionId> session) {
  if (blank(query) && blank(answer)) {
    throw Error(ErrorCode::kEmptyInteraction, "query and answer are both empty");
  }
  if (now < 0) throw Error(ErrorCode::kInvalidArgument, "timestamp must be non-negative");

  bool start_new = false;
  SessionId target;
  if (session) {
    if (!session_members_.contains(*session)) {
      throw Error(ErrorCode::kUnknownSession, "unknown session '" + *session + "'");
    }
    target = *session;
  } else if (!current_session_ ||
             (last_ingest_at_ && now - *last_ingest_at_ > cfg_.session_gap_seconds)) {
    start_new = true;
    target = make_session_id(now);
  } else {
    target = *current_session_;
  }

  const UnixSeconds id_time = std::max(now, last_id_time_);
  MemorySegment segment;
  segment.id = new_segment_id(id_time, next_sequence_);
  segment.session_id = target;
  segment.created_at = now;
  segment.query_text = std::string(query);
  segment.answer_text = std::string(answer);
  const auto raw_length = static_cast<std::int64_t>(query.size() + answer.size());
  if (raw_length > cfg_.compress_threshold_chars) {
    segment.extracted_text = ports_.compressor->compress(segment);
    segment.kind = SegmentKind::kExtracted;
    segment.query_text.clear();
    segment.answer_text.clear();
  }

  const EmbeddingVector embedded = ports_.embedder->embed(segment.content());
  if (embedded.dimension() != static_cast<std::size_t>(cfg_.embed_dim)) {
    throw Error(ErrorCode::kDimensionMismatch, "embedder returned a vector of wrong dimension");
  }
  // The in-memory vector is the one the float sidecar reloads to.
  const std::vector<float> row = embedded.to_float_row();
  segment.embedding = EmbeddingVector::from_float_row(row);
  segment.validate();

  const ImportanceResult importance = ports_.importance->evaluate(segment, persona_);
  MemoryHeader header;
  header.importance = std::clamp(importance.score, 1, 10);
  header.importance_fallback = importance.fallback;
  header.persona_sim = persona_similarity(segment.embedding, persona_);
  header.recall_count = 1;
  header.last_access = now;
  header.score_epoch = score_epoch_;
  header.cached_score = priority_score(header, now, cfg_).total;

  // The id is spent even if the append below fails part-way.
  next_sequence_ += 1;
  last_id_time_ = id_time;
  const std::uint64_t offset = writer_ != nullptr ? writer_->append(segment, header, row) : 0;

  if (start_new) {
    ++next_session_sequence_;
    activate_session(target);
    current_session_ = target;
  }
  last_ingest_at_ = now;

  IngestResult result;
  result.record_id = segment.id;
  result.session_id = target;
  result.importance = header.importance;
  result.kind = segment.kind;
  const std::size_t index = records_.size();
  append_record({segment, header, offset, false});

  persona_ = ports_.persona->update(persona_, records_[index].segment);
  if (drift_gate(persona_, cfg_)) {
    rescore(now);
    result.rescored = true;
  }
  rebalance_pool();
  result.placement = placement_[index];
  return result;
}

bool TierStore::ranks_before(std::size_t a, std::size_t b) const {
  const auto& ha = records_[a].header;
  const auto& hb = records_[b].header;
  if (ha.cached_score != hb.cached_score) return ha.cached_score > hb.cached_score;
  if (ha.last_access != hb.last_access) return ha.last_access > hb.last_access;
  return a > b;  // ids grow with the index: the newer record wins
}

void TierStore::rebalance_pool() {
  std::vector<std::size_t> pool;
  pool.reserve(pivotal_.size() + buffer_.size() + pending_.size());
  for (const auto* list : {&pivotal_, &buffer_, &pending_}) {
    for (std::size_t i : *list) {
      if (placement_[i] != Placement::kTier1Recency) pool.push_back(i);
    }
  }
  pending_.clear();
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  std::sort(pool.begin(), pool.end(),
            [this](std::size_t a, std::size_t b) { return ranks_before(a, b); });

  const auto k = std::min(pool.size(), static_cast<std::size_t>(cfg_.pivotal_k));
  const auto h = std::min(pool.size() - k, static_cast<std::size_t>(cfg_.buffer_h));
  pivotal_.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  buffer_.assign(pool.begin() + static_cast<std::ptrdiff_t>(k),
                 pool.begin() + static_cast<std::ptrdiff_t>(k + h));
  for (std::size_t r = 0; r < pool.size(); ++r) {
    placement_[pool[r]] = r < k       ? Placement::kTier1Pivotal
                          : r < k + h ? Placement::kTier2Buffer
                                      : Placement::kTier3Archive;
  }
}

TierIndex TierStore::rebalance(UnixSeconds /*now*/) {
  rebalance_pool();
  return index();
}

Placement TierStore::on_access(const RecordId& id, UnixSeconds now) {
  const std::size_t i = index_of(id);
  auto& record = records_[i];
  record.header = refresh_on_access(record.header, now);
  // Archive records are only ever rescored here, lazily.
  record.header.persona_sim = persona_similarity(record.segment.embedding, persona_);
  record.header.score_epoch = score_epoch_;
  record.header.cached_score = priority_score(record.header, now, cfg_).total;
  record.touched = true;
  if (placement_[i] != Placement::kTier1Recency) pending_.push_back(i);
  rebalance_pool();
  return placement_[i];
}

void TierStore::rescore(UnixSeconds now) {
  std::vector<std::size_t> active = tier1_indices();
  active.insert(active.end(), buffer_.begin(), buffer_.end());
  std::vector<ActiveRecord> view;
  view.reserve(active.size());
  for (std::size_t i : active) {
    view.push_back({&records_[i].segment, &records_[i].header});
    records_[i].touched = true;
  }
  score_epoch_ = rescore_active(view, persona_, now, cfg_, score_epoch_);
}

bool TierStore::apply_drift_gate(UnixSeconds now) {
  if (!drift_gate(persona_, cfg_)) return false;
  rescore(now);
  rebalance_pool();
  return true;
}

void TierStore::force_rescore(UnixSeconds now) {
  rescore(now);
  rebalance_pool();
}

TierStats TierStore::tier_stats() const {
  TierStats stats;
  stats.archive_size = records_.size();
  stats.recency_sessions = recency_sessions_.size();
  stats.score_epoch = score_epoch_;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const double score = records_[i].header.cached_score;
    switch (placement_[i]) {
      case Placement::kTier1Recency:
        ++stats.recency;
        widen(stats.recency_scores, score);
        break;
      case Placement::kTier1Pivotal:
        ++stats.pivotal;
        widen(stats.pivotal_scores, score);
        break;
      case Placement::kTier2Buffer:
        ++stats.buffer;
        widen(stats.buffer_scores, score);
        break;
      case Placement::kTier3Archive:
        ++stats.archive_only;
        widen(stats.archive_scores, score);
        break;
    }
  }
  return stats;
}

void TierStore::set_persona_profile(std::string text, UnixSeconds now) {
  if (blank(text)) throw Error(ErrorCode::kEmptyText, "persona profile is empty");
  persona_.vector = ports_.embedder->embed(text);
  persona_.profile_text = std::move(text);
  persona_.updated_at = now;
}

void TierStore::set_persona_vector(EmbeddingVector vector) {
  if (vector.dimension() != static_cast<std::size_t>(cfg_.embed_dim)) {
    throw Error(ErrorCode::kDimensionMismatch, "persona vector has wrong dimension");
  }
  persona_.vector = std::move(vector);
}

bool TierStore::contains(const RecordId& id) const { return by_id_.contains(id); }

std::size_t TierStore::index_of(const RecordId& id) const {
  const auto it = by_id_.find(id);
  if (it == by_id_.end()) throw Error(ErrorCode::kUnknownRecord, "unknown record '" + id.str() + "'");
  return it->second;
}

std::vector<std::size_t> TierStore::recency_indices() const {
  std::vector<std::size_t> out;
  for (const auto& session : recency_sessions_) {
    const auto it = session_members_.find(session);
    if (it != session_members_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  }
  return out;
}

std::vector<std::size_t> TierStore::tier1_indices() const {
  auto out = recency_indices();
  out.insert(out.end(), pivotal_.begin(), pivotal_.end());
  return out;
}

std::vector<std::size_t> TierStore::tier2_indices() const { return buffer_; }

TierIndex TierStore::index() const {
  TierIndex idx;
  idx.recency_sessions.assign(recency_sessions_.begin(), recency_sessions_.end());
  for (std::size_t i : pivotal_) idx.pivotal_ids.push_back(records_[i].segment.id);
  for (std::size_t i : buffer_) idx.buffer_ids.push_back(records_[i].segment.id);
  return idx;
}

TierSnapshot TierStore::export_state() const {
  TierSnapshot st;
  st.recency_sessions.assign(recency_sessions_.begin(), recency_sessions_.end());
  auto entry = [this](std::size_t i) { return HeaderEntry{records_[i].segment.id, records_[i].header}; };
  for (std::size_t i : recency_indices()) st.recency.push_back(entry(i));
  for (std::size_t i : pivotal_) st.pivotal.push_back(entry(i));
  for (std::size_t i : buffer_) st.buffer.push_back(entry(i));
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].touched && placement_[i] == Placement::kTier3Archive) st.touched.push_back(entry(i));
  }
  st.persona = persona_;
  st.score_epoch = score_epoch_;
  if (!records_.empty()) st.last_id = records_.back().segment.id;
  st.current_session = current_session_;
  st.last_ingest_at = last_ingest_at_;
  st.next_session_sequence = next_session_sequence_;
  return st;
}

void TierStore::restore_record(MemorySegment segment, const MemoryHeader& header,
                               std::uint64_t offset) {
  if (!records_.empty() && !(records_.back().segment.id < segment.id)) {
    throw Error(ErrorCode::kIdOrderViolation, "restored records must arrive in id order");
  }
  consume_id(segment.id);
  note_session_id(segment.session_id);
  const std::size_t i = records_.size();
  by_id_.emplace(segment.id, i);
  session_members_[segment.session_id].push_back(i);
  records_.push_back({std::move(segment), header, offset, false});
  placement_.push_back(Placement::kTier3Archive);
}

void TierStore::restore_state(const TierSnapshot& state) {
  recency_sessions_.assign(state.recency_sessions.begin(), state.recency_sessions.end());
  for (const auto& session : recency_sessions_) {
    note_session_id(session);
    for (std::size_t i : session_members_[session]) placement_[i] = Placement::kTier1Recency;
  }
  auto apply = [this](const std::vector<HeaderEntry>& entries) {
    std::vector<std::size_t> out;
    for (const auto& e : entries) {
      const std::size_t i = index_of(e.id);
      // Before this point the record carries its ingestion-time header.
      if (records_[i].header != e.header) records_[i].touched = true;
      records_[i].header = e.header;
      out.push_back(i);
    }
    return out;
  };
  apply(state.recency);
  apply(state.touched);
  pivotal_ = apply(state.pivotal);
  buffer_ = apply(state.buffer);
  for (std::size_t i : pivotal_) placement_[i] = Placement::kTier1Pivotal;
  for (std::size_t i : buffer_) placement_[i] = Placement::kTier2Buffer;
  pending_.clear();

  persona_ = state.persona;
  score_epoch_ = state.score_epoch;
  current_session_ = state.current_session;
  last_ingest_at_ = state.last_ingest_at;
  next_session_sequence_ = std::max(next_session_sequence_, state.next_session_sequence);
  if (current_session_) session_members_.try_emplace(*current_session_);
  for (const auto& session : recency_sessions_) session_members_.try_emplace(session);
}

void TierStore::replay_row(const ArchiveRow& row, EmbeddingVector embedding, std::uint64_t offset) {
  if (embedding.dimension() != static_cast<std::size_t>(cfg_.embed_dim)) {
    throw Error(ErrorCode::kDimensionMismatch, "replayed embedding has wrong dimension");
  }
  if (!records_.empty() && !(records_.back().segment.id < row.id)) {
    throw Error(ErrorCode::kIdOrderViolation, "replayed rows must arrive in id order");
  }
  if (!session_members_.contains(row.session_id)) {
    note_session_id(row.session_id);
    activate_session(row.session_id);
    current_session_ = row.session_id;
  }
  consume_id(row.id);

  MemoryHeader header;
  header.importance = std::clamp(row.importance, 1, 10);
  header.importance_fallback = row.importance_fallback;
  header.persona_sim = row.persona_sim_at_ingest;
  header.recall_count = 1;
  header.last_access = row.created_at;
  header.score_epoch = score_epoch_;
  header.cached_score = priority_score(header, row.created_at, cfg_).total;

  const std::size_t index = records_.size();
  append_record({row.to_segment(std::move(embedding)), header, offset, false});
  last_ingest_at_ = row.created_at;

  // Replay stays offline: the vector update is local, profile text is not rewritten remotely.
  persona_ = EmaPersonaUpdater().update(persona_, records_[index].segment);
  if (drift_gate(persona_, cfg_)) rescore(row.created_at);
  rebalance_pool();
}

}  // namespace hmo
