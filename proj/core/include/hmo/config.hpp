#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace hmo {

struct EngineConfig {
  // Priority score weights and per-second decay.
  double alpha = 1.0;
  double beta = 1.0;
  double lambda = 1e-5;
  // Drift gate threshold on the persona L2 distance.
  double tau = 0.10;
  // Tier capacities: recent sessions, pivotal records, buffer records.
  std::int64_t sessions_cached = 5;
  std::int64_t pivotal_k = 50;
  std::int64_t buffer_h = 200;
  std::int64_t embed_dim = 256;
  double reflect_threshold = 0.35;
  std::int64_t reflect_min_hits = 1;
  std::int64_t compress_threshold_chars = 4000;
  std::int64_t session_gap_seconds = 1800;
  double persona_ema_rate = 0.05;

  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;

  // Throws kInvalidConfig on negative capacities/rates, embed_dim < 1 or an
  // EMA rate outside [0, 1].
  void validate() const;
};

/// Sorted-key compact JSON; the byte string that config_hash digests.
std::string to_canonical_json(const EngineConfig& cfg);

/// Parses a config object. Missing keys keep their defaults; unknown keys are
/// rejected with kInvalidConfig.
EngineConfig config_from_json(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// 64-bit FNV-1a of to_canonical_json(cfg).
std::uint64_t config_hash(const EngineConfig& cfg);

}  // namespace hmo
