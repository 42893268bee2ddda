#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hmo {

using UnixSeconds = std::int64_t;
using SessionId = std::string;

// Unit-length embedding. Cosine similarity between two of these is their dot
// product.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;

  std::span<const double> values() const noexcept { return values_; }
  std::size_t dimension() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  // Single-precision storage row. from_float_row(row) widens and
  // renormalizes, and is what the archive sidecar reloads.
  std::vector<float> to_float_row() const;
  static EmbeddingVector from_float_row(std::span<const float> row);

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  friend EmbeddingVector normalize_embedding(std::span<const double> raw);
  explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {}

  std::vector<double> values_;
};

/// Scales `raw` to unit L2 length. Vectors already within 1e-12 of unit
/// length are returned unchanged, so the operation is idempotent bit for bit.
/// Throws ErrorCode::kZeroVector when the norm is below 1e-12.
EmbeddingVector normalize_embedding(std::span<const double> raw);

/// Same, but also rejects inputs whose length differs from `dim`.
EmbeddingVector normalize_embedding(std::span<const double> raw, std::size_t dim);

/// Dot product clamped to [-1, 1]. Throws kDimensionMismatch.
double cosine_sim(const EmbeddingVector& u, const EmbeddingVector& v);

// Timestamp-prefixed, lexicographically sortable 26-character identifier.
class RecordId {
 public:
  RecordId() = default;
  explicit RecordId(std::string value) : value_(std::move(value)) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const RecordId&, const RecordId&) = default;
  friend bool operator==(const RecordId&, const RecordId&) = default;

 private:
  std::string value_;
};

inline constexpr std::size_t kSegmentIdLength = 26;

/// 10 Crockford base32 characters of `created_at` followed by 16 of
/// `sequence`. Lexicographic order equals (created_at, sequence) order.
RecordId new_segment_id(UnixSeconds created_at, std::uint64_t sequence);

/// Inverse of new_segment_id. Throws kInvalidArgument on malformed input.
std::pair<UnixSeconds, std::uint64_t> decode_segment_id(const RecordId& id);

enum class SegmentKind { kRaw, kExtracted };

std::string_view to_string(SegmentKind kind);
SegmentKind segment_kind_from_string(std::string_view text);

struct MemorySegment {
  RecordId id;
  SessionId session_id;
  SegmentKind kind = SegmentKind::kRaw;
  std::string query_text;
  std::string answer_text;
  std::string extracted_text;
  UnixSeconds created_at = 0;
  EmbeddingVector embedding;

  // Text seen by the embedder and evaluators: "query\nanswer" for raw
  // segments, the extraction otherwise.
  std::string content() const;

  // Throws kInvalidArgument if the kind/text or timestamp invariants fail.
  void validate() const;
};

struct MemoryHeader {
  int importance = 5;
  double persona_sim = 0.0;
  std::int64_t recall_count = 1;
  UnixSeconds last_access = 0;
  double cached_score = 0.0;
  std::uint64_t score_epoch = 0;
  // Set when the importance evaluator failed and the neutral score was used.
  bool importance_fallback = false;

  friend bool operator==(const MemoryHeader&, const MemoryHeader&) = default;
};

// The user profile. `vector` stays empty until the first interaction or an
// explicit profile is set; an empty persona is similar to nothing (sim 0).
struct PersonaState {
  std::string profile_text;
  std::optional<EmbeddingVector> vector;
  std::optional<EmbeddingVector> anchor_vector;
  double ema_rate = 0.05;
  UnixSeconds updated_at = 0;

  friend bool operator==(const PersonaState&, const PersonaState&) = default;
};

/// cosine_sim against the persona vector, 0 when no persona exists yet.
double persona_similarity(const EmbeddingVector& v, const PersonaState& persona);

enum class Placement { kTier1Recency, kTier1Pivotal, kTier2Buffer, kTier3Archive };

std::string_view to_string(Placement placement);
Placement placement_from_string(std::string_view text);
/// 1 for both Tier-1 sub-pools, 2 for the buffer, 3 for the archive.
int tier_number(Placement placement);

}  // namespace hmo

template <>
struct std::hash<hmo::RecordId> {
  std::size_t operator()(const hmo::RecordId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
