#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "hmo/config.hpp"
#include "hmo/ports.hpp"
#include "hmo/recovery.hpp"
#include "hmo/retrieval.hpp"
#include "hmo/storage.hpp"
#include "hmo/tier_store.hpp"

namespace hmo {

using Clock = std::function<UnixSeconds()>;

/// Wall clock in unix seconds.
UnixSeconds system_clock_now();

struct EngineOptions {
  EngineConfig config;
  // Reference ports for `config` when left empty.
  std::optional<Ports> ports;
  // In-memory engine when unset.
  std::optional<std::filesystem::path> store_dir;
  Clock clock = system_clock_now;
};

struct PersonaView {
  PersonaState state;
  double drift = 0.0;  // distance from the anchor, 0 without one
};

// Thread-safe front end over a TierStore. Mutations run one at a time under
// an exclusive lock; searches share the lock and see a consistent state.
// Access refreshes triggered by a search are applied afterwards, in arrival
// order, through the same exclusive path.
class Engine {
 public:
  /// Opens (and recovers) a store directory or creates an in-memory engine.
  /// If the directory holds a config.json that differs from the requested
  /// config, opening fails with kConfigMismatch.
  static std::unique_ptr<Engine> open(EngineOptions options);

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  SessionId begin_session(std::optional<UnixSeconds> now = std::nullopt);
  IngestResult ingest(std::string_view query, std::string_view answer,
                      std::optional<UnixSeconds> now = std::nullopt,
                      std::optional<SessionId> session = std::nullopt);
  RetrievalReport retrieve(std::string_view query, std::size_t k,
                           RetrievalMode mode = RetrievalMode::kTiered,
                           std::optional<UnixSeconds> now = std::nullopt);
  Placement access(const RecordId& id, std::optional<UnixSeconds> now = std::nullopt);
  void force_rescore(std::optional<UnixSeconds> now = std::nullopt);
  bool apply_drift_gate(std::optional<UnixSeconds> now = std::nullopt);

  PersonaView persona() const;
  void set_persona_profile(std::string text, std::optional<UnixSeconds> now = std::nullopt);

  TierStats tier_stats() const;
  TierIndex tier_index() const;

  /// Writes the next snapshot and returns its epoch. Throws kInvalidArgument
  /// for an in-memory engine.
  std::uint64_t snapshot(std::optional<UnixSeconds> now = std::nullopt);

  bool persistent() const noexcept { return paths_.has_value(); }
  const RecoveryReport& recovery_report() const noexcept { return recovery_; }
  const EngineConfig& config() const noexcept { return store_->config(); }

  /// Runs `fn(const TierStore&)` under the shared lock.
  template <typename Fn>
  decltype(auto) read(Fn&& fn) const {
    std::shared_lock lock(mutex_);
    return std::forward<Fn>(fn)(static_cast<const TierStore&>(*store_));
  }

  /// Runs `fn(TierStore&)` under the exclusive lock.
  template <typename Fn>
  decltype(auto) write(Fn&& fn) {
    std::unique_lock lock(mutex_);
    return std::forward<Fn>(fn)(*store_);
  }

 private:
  Engine() = default;
  UnixSeconds resolve(std::optional<UnixSeconds> now) const;

  mutable std::shared_mutex mutex_;
  std::optional<StorePaths> paths_;
  std::unique_ptr<ArchiveWriter> writer_;
  std::unique_ptr<TierStore> store_;
  Clock clock_;
  std::uint64_t snapshot_epoch_ = 0;
  RecoveryReport recovery_;
};

}  // namespace hmo
