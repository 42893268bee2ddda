#include "hmo/storage.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "hmo/error.hpp"

namespace hmo {

namespace {

using nlohmann::json;

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
}

std::uintmax_t file_size_or_zero(const fs::path& p) {
  std::error_code ec;
  const auto size = fs::file_size(p, ec);
  return ec ? 0 : size;
}

// Makes sure the next append starts on a fresh line.
void close_partial_line(const fs::path& p) {
  const auto size = file_size_or_zero(p);
  if (size == 0) return;
  std::ifstream in(p, std::ios::binary);
  in.seekg(static_cast<std::streamoff>(size - 1));
  char last = '\n';
  in.get(last);
  if (last != '\n') {
    std::ofstream out(p, std::ios::binary | std::ios::app);
    out.put('\n');
  }
}

std::ofstream open_append(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot open " + p.string() + " for appending");
  return out;
}

void check_stream(const std::ostream& out, const fs::path& p) {
  if (!out) throw Error(ErrorCode::kIoFailure, "write to " + p.string() + " failed");
}

json header_to_json(const MemoryHeader& h) {
  return json{{"importance", h.importance},
              {"persona_sim", h.persona_sim},
              {"recall_count", h.recall_count},
              {"last_access", h.last_access},
              {"cached_score", h.cached_score},
              {"score_epoch", h.score_epoch},
              {"importance_fallback", h.importance_fallback}};
}

MemoryHeader header_from_json(const json& j) {
  MemoryHeader h;
  h.importance = j.at("importance").get<int>();
  h.persona_sim = j.at("persona_sim").get<double>();
  h.recall_count = j.at("recall_count").get<std::int64_t>();
  h.last_access = j.at("last_access").get<UnixSeconds>();
  h.cached_score = j.at("cached_score").get<double>();
  h.score_epoch = j.at("score_epoch").get<std::uint64_t>();
  h.importance_fallback = j.value("importance_fallback", false);
  return h;
}

json entries_to_json(const std::vector<HeaderEntry>& entries) {
  json arr = json::array();
  for (const auto& e : entries) arr.push_back(json{{"id", e.id.str()}, {"header", header_to_json(e.header)}});
  return arr;
}

std::vector<HeaderEntry> entries_from_json(const json& arr) {
  std::vector<HeaderEntry> out;
  out.reserve(arr.size());
  for (const auto& e : arr) {
    out.push_back({RecordId(e.at("id").get<std::string>()), header_from_json(e.at("header"))});
  }
  return out;
}

json vector_to_json(const std::optional<EmbeddingVector>& v) {
  if (!v) return nullptr;
  return json(std::vector<double>(v->values().begin(), v->values().end()));
}

std::optional<EmbeddingVector> vector_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return normalize_embedding(j.get<std::vector<double>>());
}

template <typename T>
json optional_to_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<std::uint64_t> epoch_of(const fs::path& p) {
  const auto name = p.filename().string();
  constexpr std::string_view prefix = "epoch-";
  constexpr std::string_view suffix = ".json";
  if (name.size() <= prefix.size() + suffix.size() || !name.starts_with(prefix) ||
      !name.ends_with(suffix)) {
    return std::nullopt;
  }
  const auto digits = name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
  if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) return std::nullopt;
  return std::stoull(digits);
}

}  // namespace

fs::path StorePaths::snapshot(std::uint64_t epoch) const {
  return snapshots() / ("epoch-" + std::to_string(epoch) + ".json");
}

ArchiveRow ArchiveRow::from(const MemorySegment& segment, const MemoryHeader& header) {
  ArchiveRow row;
  row.id = segment.id;
  row.session_id = segment.session_id;
  row.kind = segment.kind;
  row.q = segment.query_text;
  row.a = segment.answer_text;
  row.text = segment.extracted_text;
  row.created_at = segment.created_at;
  row.importance = header.importance;
  row.persona_sim_at_ingest = header.persona_sim;
  row.dim = segment.embedding.dimension();
  row.score_epoch = header.score_epoch;
  row.importance_fallback = header.importance_fallback;
  return row;
}

MemorySegment ArchiveRow::to_segment(EmbeddingVector embedding) const {
  MemorySegment s;
  s.id = id;
  s.session_id = session_id;
  s.kind = kind;
  s.query_text = q;
  s.answer_text = a;
  s.extracted_text = text;
  s.created_at = created_at;
  s.embedding = std::move(embedding);
  return s;
}

std::string ArchiveRow::to_json_line() const {
  json j{{"id", id.str()},
         {"session_id", session_id},
         {"kind", to_string(kind)},
         {"q", q},
         {"a", a},
         {"text", text},
         {"created_at", created_at},
         {"importance", importance},
         {"persona_sim_at_ingest", persona_sim_at_ingest},
         {"dim", dim},
         {"score_epoch", score_epoch}};
  if (importance_fallback) j["importance_fallback"] = true;
  return j.dump();
}

ArchiveRow ArchiveRow::parse(std::string_view line) {
  try {
    const json j = json::parse(line);
    ArchiveRow row;
    row.id = RecordId(j.at("id").get<std::string>());
    decode_segment_id(row.id);
    row.session_id = j.at("session_id").get<std::string>();
    row.kind = segment_kind_from_string(j.at("kind").get<std::string>());
    row.q = j.at("q").get<std::string>();
    row.a = j.at("a").get<std::string>();
    row.text = j.at("text").get<std::string>();
    row.created_at = j.at("created_at").get<UnixSeconds>();
    row.importance = j.at("importance").get<int>();
    row.persona_sim_at_ingest = j.at("persona_sim_at_ingest").get<double>();
    row.dim = j.at("dim").get<std::size_t>();
    row.score_epoch = j.value("score_epoch", std::uint64_t{0});
    row.importance_fallback = j.value("importance_fallback", false);
    return row;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorruptLine, std::string("bad archive row: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorruptLine, std::string("bad archive row: ") + e.what());
  }
}

ArchiveWriter::ArchiveWriter(StorePaths paths, std::size_t dim, std::optional<RecordId> last_id)
    : paths_(std::move(paths)), dim_(dim), last_id_(std::move(last_id)) {
  std::error_code ec;
  fs::create_directories(paths_.dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + paths_.dir.string());

  close_partial_line(paths_.archive());
  close_partial_line(paths_.embedding_index());
  const std::uintmax_t row_bytes = dim_ * sizeof(float);
  if (const auto size = file_size_or_zero(paths_.embeddings()); size % row_bytes != 0) {
    // Pad a torn row to full width; it stays unreferenced.
    std::ofstream pad(paths_.embeddings(), std::ios::binary | std::ios::app);
    const std::string zeros(row_bytes - size % row_bytes, '\0');
    pad.write(zeros.data(), static_cast<std::streamsize>(zeros.size()));
  }

  archive_ = open_append(paths_.archive());
  embeddings_ = open_append(paths_.embeddings());
  index_ = open_append(paths_.embedding_index());
  archive_bytes_ = file_size_or_zero(paths_.archive());
  embedding_rows_ = file_size_or_zero(paths_.embeddings()) / row_bytes;
}

std::uint64_t ArchiveWriter::append(const MemorySegment& segment, const MemoryHeader& header,
                                    std::span<const float> embedding_row) {
  if (last_id_ && !(*last_id_ < segment.id)) {
    throw Error(ErrorCode::kIdOrderViolation,
                "id " + segment.id.str() + " does not follow " + last_id_->str());
  }
  if (embedding_row.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "embedding row has wrong dimension");
  }

  const std::string line = ArchiveRow::from(segment, header).to_json_line() + "\n";
  const std::uint64_t offset = archive_bytes_;
  archive_.write(line.data(), static_cast<std::streamsize>(line.size()));
  archive_.flush();
  check_stream(archive_, paths_.archive());
  archive_bytes_ += line.size();
  last_id_ = segment.id;
  if (crash_ == CrashPoint::kAfterArchiveLine) {
    throw Error(ErrorCode::kIoFailure, "injected crash after archive line");
  }

  std::string bytes(embedding_row.size() * sizeof(float), '\0');
  for (std::size_t i = 0; i < embedding_row.size(); ++i) {
    const std::uint32_t le = to_little_endian(std::bit_cast<std::uint32_t>(embedding_row[i]));
    std::memcpy(bytes.data() + i * sizeof(float), &le, sizeof(le));
  }
  embeddings_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  embeddings_.flush();
  check_stream(embeddings_, paths_.embeddings());
  const std::uint64_t row = embedding_rows_++;
  if (crash_ == CrashPoint::kAfterEmbeddingRow) {
    throw Error(ErrorCode::kIoFailure, "injected crash after embedding row");
  }

  index_ << json{{"id", segment.id.str()}, {"row", row}}.dump() << '\n';
  index_.flush();
  check_stream(index_, paths_.embedding_index());
  return offset;
}

ArchiveScan read_archive(const StorePaths& paths, std::size_t dim) {
  ArchiveScan scan;

  std::unordered_map<std::string, std::uint64_t> rows_by_id;
  if (std::ifstream idx(paths.embedding_index()); idx) {
    std::string line;
    std::size_t n = 0;
    while (std::getline(idx, line)) {
      ++n;
      if (line.empty()) continue;
      try {
        const json j = json::parse(line);
        rows_by_id[j.at("id").get<std::string>()] = j.at("row").get<std::uint64_t>();
      } catch (const json::exception&) {
        ++scan.corrupt_lines;
        scan.warnings.push_back("embeddings.idx.jsonl line " + std::to_string(n) + " is corrupt");
      }
    }
  }

  const std::uint64_t row_bytes = dim * sizeof(float);
  const std::uint64_t complete_rows = file_size_or_zero(paths.embeddings()) / row_bytes;
  std::ifstream bin(paths.embeddings(), std::ios::binary);
  std::vector<bool> referenced(complete_rows, false);

  std::ifstream archive(paths.archive(), std::ios::binary);
  std::string line;
  std::uint64_t offset = 0;
  std::size_t line_no = 0;
  while (std::getline(archive, line)) {
    const std::uint64_t line_offset = offset;
    offset += line.size() + 1;
    ++line_no;
    if (line.empty()) continue;
    ArchiveRow row;
    try {
      row = ArchiveRow::parse(line);
    } catch (const Error& e) {
      ++scan.corrupt_lines;
      scan.warnings.push_back("archive.jsonl line " + std::to_string(line_no) + ": " + e.what());
      continue;
    }
    if (scan.last_written_id && !(*scan.last_written_id < row.id)) {
      ++scan.corrupt_lines;
      scan.warnings.push_back("archive.jsonl line " + std::to_string(line_no) + ": id out of order");
      continue;
    }
    scan.last_written_id = row.id;
    if (row.dim != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "archive row " + row.id.str() + " has dimension " + std::to_string(row.dim) +
                      ", store uses " + std::to_string(dim));
    }
    const auto it = rows_by_id.find(row.id.str());
    if (it == rows_by_id.end() || it->second >= complete_rows) {
      ++scan.orphan_rows;
      scan.warnings.push_back("record " + row.id.str() + " has no embedding index entry; skipped");
      continue;
    }
    referenced[it->second] = true;
    std::vector<float> values(dim);
    std::string bytes(row_bytes, '\0');
    bin.seekg(static_cast<std::streamoff>(it->second * row_bytes));
    bin.read(bytes.data(), static_cast<std::streamsize>(row_bytes));
    if (!bin) throw Error(ErrorCode::kIoFailure, "cannot read embedding row");
    for (std::size_t i = 0; i < dim; ++i) {
      std::uint32_t le = 0;
      std::memcpy(&le, bytes.data() + i * sizeof(float), sizeof(le));
      values[i] = std::bit_cast<float>(to_little_endian(le));
    }
    scan.records.push_back({std::move(row), std::move(values), line_offset});
  }
  scan.orphan_embedding_rows =
      static_cast<std::size_t>(std::count(referenced.begin(), referenced.end(), false));
  if (scan.orphan_embedding_rows > 0) {
    scan.warnings.push_back(std::to_string(scan.orphan_embedding_rows) +
                            " embedding row(s) without index entry ignored");
  }
  return scan;
}

void write_snapshot(const StorePaths& paths, const SnapshotFile& snapshot) {
  const auto& st = snapshot.state;
  json persona{{"profile_text", st.persona.profile_text},
               {"vector", vector_to_json(st.persona.vector)},
               {"anchor_vector", vector_to_json(st.persona.anchor_vector)},
               {"ema_rate", st.persona.ema_rate},
               {"updated_at", st.persona.updated_at}};
  json j{{"epoch", snapshot.epoch},
         {"taken_at", snapshot.taken_at},
         {"config_hash", snapshot.config_hash},
         {"recency_sessions", st.recency_sessions},
         {"recency", entries_to_json(st.recency)},
         {"pivotal", entries_to_json(st.pivotal)},
         {"buffer", entries_to_json(st.buffer)},
         {"touched", entries_to_json(st.touched)},
         {"persona", persona},
         {"score_epoch", st.score_epoch},
         {"last_id", st.last_id ? json(st.last_id->str()) : json(nullptr)},
         {"current_session", optional_to_json(st.current_session)},
         {"last_ingest_at", optional_to_json(st.last_ingest_at)},
         {"next_session_sequence", st.next_session_sequence}};

  std::error_code ec;
  fs::create_directories(paths.snapshots(), ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + paths.snapshots().string());
  const auto target = paths.snapshot(snapshot.epoch);
  auto tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << j.dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot rename snapshot into place: " + ec.message());
}

std::uint64_t latest_snapshot_epoch(const StorePaths& paths) {
  std::uint64_t latest = 0;
  std::error_code ec;
  if (!fs::is_directory(paths.snapshots(), ec)) return 0;
  for (const auto& entry : fs::directory_iterator(paths.snapshots(), ec)) {
    if (auto e = epoch_of(entry.path())) latest = std::max(latest, *e);
  }
  return latest;
}

std::optional<SnapshotFile> load_latest_snapshot(const StorePaths& paths) {
  const auto epoch = latest_snapshot_epoch(paths);
  if (epoch == 0) return std::nullopt;
  const auto path = paths.snapshot(epoch);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  try {
    const json j = json::parse(in);
    SnapshotFile snap;
    snap.epoch = j.at("epoch").get<std::uint64_t>();
    snap.taken_at = j.at("taken_at").get<UnixSeconds>();
    snap.config_hash = j.at("config_hash").get<std::uint64_t>();
    auto& st = snap.state;
    st.recency_sessions = j.at("recency_sessions").get<std::vector<SessionId>>();
    st.recency = entries_from_json(j.at("recency"));
    st.pivotal = entries_from_json(j.at("pivotal"));
    st.buffer = entries_from_json(j.at("buffer"));
    st.touched = entries_from_json(j.at("touched"));
    const auto& p = j.at("persona");
    st.persona.profile_text = p.at("profile_text").get<std::string>();
    st.persona.vector = vector_from_json(p.at("vector"));
    st.persona.anchor_vector = vector_from_json(p.at("anchor_vector"));
    st.persona.ema_rate = p.at("ema_rate").get<double>();
    st.persona.updated_at = p.at("updated_at").get<UnixSeconds>();
    st.score_epoch = j.at("score_epoch").get<std::uint64_t>();
    if (!j.at("last_id").is_null()) st.last_id = RecordId(j.at("last_id").get<std::string>());
    if (!j.at("current_session").is_null()) {
      st.current_session = j.at("current_session").get<std::string>();
    }
    if (!j.at("last_ingest_at").is_null()) {
      st.last_ingest_at = j.at("last_ingest_at").get<UnixSeconds>();
    }
    st.next_session_sequence = j.at("next_session_sequence").get<std::uint64_t>();
    return snap;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorruptLine, path.string() + ": " + e.what());
  }
}

void write_config(const StorePaths& paths, const EngineConfig& cfg) {
  std::error_code ec;
  fs::create_directories(paths.dir, ec);
  std::ofstream out(paths.config(), std::ios::binary | std::ios::trunc);
  out << to_canonical_json(cfg) << '\n';
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + paths.config().string());
}

std::optional<EngineConfig> read_config(const StorePaths& paths) {
  std::ifstream in(paths.config(), std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

}  // namespace hmo
