#pragma once

#include <cstdint>
#include <span>

#include "hmo/config.hpp"
#include "hmo/model.hpp"

namespace hmo {

// Factors of the priority score; total = base * frequency_gain * decay_factor.
struct ScoreBreakdown {
  double base = 0.0;            // max(0, alpha * I + beta * sim)
  double frequency_gain = 0.0;  // ln(1 + C)
  double decay_factor = 1.0;    // exp(-lambda * dt / ln(1 + C)), dt >= 0
  double total = 0.0;
};

/// Adaptive priority of a record at `now`. Frequently recalled records both
/// gain more and decay more slowly. Negative elapsed time counts as zero.
/// Throws kInvalidHeader when recall_count < 1.
ScoreBreakdown priority_score(const MemoryHeader& header, UnixSeconds now,
                              const EngineConfig& cfg);

/// recall_count + 1 and last_access = now; nothing else changes.
MemoryHeader refresh_on_access(MemoryHeader header, UnixSeconds now);

/// Euclidean distance. Throws kDimensionMismatch.
double drift_distance(const EmbeddingVector& p_new, const EmbeddingVector& p_anchor);

/// True iff the persona moved at least tau away from its anchor (inclusive).
/// A persona without a vector never triggers; one with a vector but no
/// anchor always does.
bool drift_gate(const PersonaState& persona, const EngineConfig& cfg);

struct ActiveRecord {
  const MemorySegment* segment = nullptr;
  MemoryHeader* header = nullptr;
};

/// Recomputes persona_sim and cached_score of exactly the given Tier 1 and
/// Tier 2 records, stamps them with the next epoch and moves the anchor to
/// the current persona vector. Importance is never re-evaluated. Returns the
/// new epoch (current_epoch + 1).
std::uint64_t rescore_active(std::span<const ActiveRecord> active, PersonaState& persona,
                             UnixSeconds now, const EngineConfig& cfg,
                             std::uint64_t current_epoch);

}  // namespace hmo
