#include "hmo/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "hmo/error.hpp"

namespace hmo {

ScoreBreakdown priority_score(const MemoryHeader& header, UnixSeconds now,
                              const EngineConfig& cfg) {
  if (header.recall_count < 1) {
    throw Error(ErrorCode::kInvalidHeader, "recall_count must be at least 1");
  }
  ScoreBreakdown s;
  s.base = std::max(0.0, cfg.alpha * header.importance + cfg.beta * header.persona_sim);
  // ln(1 + C) >= ln 2 because C >= 1, so the exponent is always defined.
  s.frequency_gain = std::log1p(static_cast<double>(header.recall_count));
  const auto elapsed = static_cast<double>(std::max<UnixSeconds>(0, now - header.last_access));
  s.decay_factor = elapsed == 0.0 ? 1.0 : std::exp(-cfg.lambda * elapsed / s.frequency_gain);
  s.total = s.base * s.frequency_gain * s.decay_factor;
  return s;
}

MemoryHeader refresh_on_access(MemoryHeader header, UnixSeconds now) {
  header.recall_count += 1;
  header.last_access = now;
  return header;
}

double drift_distance(const EmbeddingVector& p_new, const EmbeddingVector& p_anchor) {
  if (p_new.dimension() != p_anchor.dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "drift_distance on vectors of different dimension");
  }
  const auto a = p_new.values();
  const auto b = p_anchor.values();
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum_sq += d * d;
  }
  return std::sqrt(sum_sq);
}

bool drift_gate(const PersonaState& persona, const EngineConfig& cfg) {
  if (!persona.vector) return false;
  if (!persona.anchor_vector) return true;
  return drift_distance(*persona.vector, *persona.anchor_vector) >= cfg.tau;
}

std::uint64_t rescore_active(std::span<const ActiveRecord> active, PersonaState& persona,
                             UnixSeconds now, const EngineConfig& cfg,
                             std::uint64_t current_epoch) {
  const std::uint64_t epoch = current_epoch + 1;
  for (const auto& record : active) {
    MemoryHeader& h = *record.header;
    h.persona_sim = persona_similarity(record.segment->embedding, persona);
    h.score_epoch = epoch;
    h.cached_score = priority_score(h, now, cfg).total;
  }
  persona.anchor_vector = persona.vector;
  return epoch;
}

}  // namespace hmo
