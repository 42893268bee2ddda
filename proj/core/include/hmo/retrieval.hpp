#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hmo/model.hpp"
#include "hmo/ports.hpp"
#include "hmo/tier_store.hpp"

namespace hmo {

// Tiered: Tier 1, then Tier 2 and Tier 3 on escalation.
// NoTier1: Tier 2, then everything outside Tier 2.
// Global: exhaustive scan of the archive, no reflection.
enum class RetrievalMode { kTiered, kNoTier1, kGlobal };

std::string_view to_string(RetrievalMode mode);
/// Accepts "tiered", "no_tier1" and "global". Throws kInvalidArgument.
RetrievalMode retrieval_mode_from_string(std::string_view text);

struct RetrievalHit {
  RecordId record_id;
  double similarity = 0.0;
  Placement placement_at_hit = Placement::kTier3Archive;
  int rank = 0;
  std::size_t index = 0;  // position in the store

  friend bool operator==(const RetrievalHit&, const RetrievalHit&) = default;
};

struct RetrievalReport {
  std::vector<RetrievalHit> hits;
  std::vector<int> tiers_searched;
  std::uint64_t candidates_scanned = 0;
  std::vector<ReflectionVerdict> verdicts;

  friend bool operator==(const RetrievalReport&, const RetrievalReport&) = default;
};

/// Strict ranking order: higher similarity first, then larger id.
bool hit_precedes(const RetrievalHit& a, const RetrievalHit& b);

/// Union of two ranked lists, one entry per record (the higher similarity
/// wins), ranked by hit_precedes and cut to k. Ranks are renumbered from 1.
std::vector<RetrievalHit> merge_ranked(std::span<const RetrievalHit> a,
                                       std::span<const RetrievalHit> b, std::size_t k);

/// Read-only search. Access refresh of the returned hits is the caller's job
/// (Engine::retrieve does it). An empty store yields an empty report.
RetrievalReport retrieve(const TierStore& store, std::string_view query_text,
                         const EmbeddingVector& query, std::size_t k, RetrievalMode mode,
                         const SufficiencyJudge& judge);

}  // namespace hmo
