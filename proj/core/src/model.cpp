#include "hmo/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "hmo/error.hpp"

namespace hmo {

namespace {

constexpr double kZeroNormFloor = 1e-12;
constexpr double kUnitTolerance = 1e-12;

constexpr std::string_view kCrockford = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";

void encode_base32(std::uint64_t value, std::size_t width, std::string& out) {
  std::array<char, 16> buf{};
  for (std::size_t i = 0; i < width; ++i) {
    buf[width - 1 - i] = kCrockford[value & 31u];
    value >>= 5;
  }
  out.append(buf.data(), width);
}

bool decode_base32(std::string_view text, std::uint64_t& value) {
  value = 0;
  for (char c : text) {
    auto pos = kCrockford.find(c);
    if (pos == std::string_view::npos) return false;
    if (value > (~std::uint64_t{0} >> 5)) return false;
    value = (value << 5) | pos;
  }
  return true;
}

}  // namespace

std::vector<float> EmbeddingVector::to_float_row() const {
  std::vector<float> row(values_.size());
  std::transform(values_.begin(), values_.end(), row.begin(),
                 [](double v) { return static_cast<float>(v); });
  return row;
}

EmbeddingVector EmbeddingVector::from_float_row(std::span<const float> row) {
  std::vector<double> widened(row.begin(), row.end());
  return normalize_embedding(widened);
}

EmbeddingVector normalize_embedding(std::span<const double> raw) {
  double sum_sq = 0.0;
  for (double v : raw) sum_sq += v * v;
  const double norm = std::sqrt(sum_sq);
  if (!(norm >= kZeroNormFloor)) {
    throw Error(ErrorCode::kZeroVector, "embedding has zero norm");
  }
  std::vector<double> values(raw.begin(), raw.end());
  if (std::abs(norm - 1.0) > kUnitTolerance) {
    for (double& v : values) v /= norm;
  }
  return EmbeddingVector(std::move(values));
}

EmbeddingVector normalize_embedding(std::span<const double> raw, std::size_t dim) {
  if (raw.size() != dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "embedding has " + std::to_string(raw.size()) + " values, expected " +
                    std::to_string(dim));
  }
  return normalize_embedding(raw);
}

double cosine_sim(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dimension() != v.dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "cosine_sim on vectors of different dimension");
  }
  const auto a = u.values();
  const auto b = v.values();
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::clamp(dot, -1.0, 1.0);
}

double persona_similarity(const EmbeddingVector& v, const PersonaState& persona) {
  return persona.vector ? cosine_sim(v, *persona.vector) : 0.0;
}

RecordId new_segment_id(UnixSeconds created_at, std::uint64_t sequence) {
  std::string out;
  out.reserve(kSegmentIdLength);
  const auto t = static_cast<std::uint64_t>(std::max<UnixSeconds>(created_at, 0));
  encode_base32(t, 10, out);
  // 16 characters hold 80 bits; the top 16 are always zero.
  encode_base32(0, 3, out);
  encode_base32(sequence, 13, out);
  return RecordId(std::move(out));
}

std::pair<UnixSeconds, std::uint64_t> decode_segment_id(const RecordId& id) {
  const std::string_view s = id.str();
  std::uint64_t t = 0;
  std::uint64_t hi = 0;
  std::uint64_t seq = 0;
  if (s.size() != kSegmentIdLength || !decode_base32(s.substr(0, 10), t) ||
      !decode_base32(s.substr(10, 3), hi) || hi != 0 || !decode_base32(s.substr(13), seq)) {
    throw Error(ErrorCode::kInvalidArgument, "malformed segment id '" + id.str() + "'");
  }
  return {static_cast<UnixSeconds>(t), seq};
}

std::string_view to_string(SegmentKind kind) {
  return kind == SegmentKind::kRaw ? "raw" : "extracted";
}

SegmentKind segment_kind_from_string(std::string_view text) {
  if (text == "raw") return SegmentKind::kRaw;
  if (text == "extracted") return SegmentKind::kExtracted;
  throw Error(ErrorCode::kInvalidArgument, "unknown segment kind '" + std::string(text) + "'");
}

std::string MemorySegment::content() const {
  if (kind == SegmentKind::kExtracted) return extracted_text;
  if (query_text.empty()) return answer_text;
  if (answer_text.empty()) return query_text;
  return query_text + "\n" + answer_text;
}

void MemorySegment::validate() const {
  if (created_at < 0) {
    throw Error(ErrorCode::kInvalidArgument, "segment created_at is negative");
  }
  if (kind == SegmentKind::kRaw && query_text.empty() && answer_text.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "raw segment without query or answer");
  }
  if (kind == SegmentKind::kExtracted && extracted_text.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "extracted segment without text");
  }
}

std::string_view to_string(Placement placement) {
  switch (placement) {
    case Placement::kTier1Recency: return "tier1_recency";
    case Placement::kTier1Pivotal: return "tier1_pivotal";
    case Placement::kTier2Buffer: return "tier2_buffer";
    case Placement::kTier3Archive: return "tier3_archive";
  }
  return "tier3_archive";
}

Placement placement_from_string(std::string_view text) {
  for (auto p : {Placement::kTier1Recency, Placement::kTier1Pivotal, Placement::kTier2Buffer,
                 Placement::kTier3Archive}) {
    if (to_string(p) == text) return p;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown placement '" + std::string(text) + "'");
}

int tier_number(Placement placement) {
  switch (placement) {
    case Placement::kTier1Recency:
    case Placement::kTier1Pivotal: return 1;
    case Placement::kTier2Buffer: return 2;
    case Placement::kTier3Archive: return 3;
  }
  return 3;
}

}  // namespace hmo
