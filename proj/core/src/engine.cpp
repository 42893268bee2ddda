#include "hmo/engine.hpp"

#include <chrono>

#include "hmo/error.hpp"
#include "hmo/scoring.hpp"

namespace hmo {

UnixSeconds system_clock_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::unique_ptr<Engine> Engine::open(EngineOptions options) {
  options.config.validate();
  std::unique_ptr<Engine> engine(new Engine());
  engine->clock_ = options.clock ? std::move(options.clock) : Clock(system_clock_now);
  Ports ports = options.ports ? std::move(*options.ports) : Ports::reference(options.config);

  if (!options.store_dir) {
    engine->store_ = std::make_unique<TierStore>(options.config, std::move(ports));
    return engine;
  }

  StorePaths paths{*options.store_dir};
  engine->writer_ = std::make_unique<ArchiveWriter>(
      paths, static_cast<std::size_t>(options.config.embed_dim), std::nullopt);
  if (auto existing = read_config(paths)) {
    if (*existing != options.config) {
      throw Error(ErrorCode::kConfigMismatch,
                  "config.json in " + paths.dir.string() + " differs from the requested config");
    }
  } else {
    write_config(paths, options.config);
  }
  engine->store_ =
      std::make_unique<TierStore>(options.config, std::move(ports), engine->writer_.get());
  engine->recovery_ = recover(*engine->store_, paths);
  engine->writer_->set_last_id(engine->recovery_.last_written_id);
  engine->snapshot_epoch_ = latest_snapshot_epoch(paths);
  engine->paths_ = std::move(paths);
  return engine;
}

UnixSeconds Engine::resolve(std::optional<UnixSeconds> now) const {
  return now ? *now : clock_();
}

SessionId Engine::begin_session(std::optional<UnixSeconds> now) {
  const UnixSeconds t = resolve(now);
  return write([&](TierStore& s) { return s.begin_session(t); });
}

IngestResult Engine::ingest(std::string_view query, std::string_view answer,
                            std::optional<UnixSeconds> now, std::optional<SessionId> session) {
  const UnixSeconds t = resolve(now);
  return write([&](TierStore& s) { return s.ingest(query, answer, t, std::move(session)); });
}

RetrievalReport Engine::retrieve(std::string_view query, std::size_t k, RetrievalMode mode,
                                 std::optional<UnixSeconds> now) {
  if (query.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos) {
    throw Error(ErrorCode::kEmptyQuery, "query is empty");
  }
  const UnixSeconds t = resolve(now);
  const Ports& ports = store_->ports();
  EmbeddingVector embedded;
  try {
    embedded = ports.embedder->embed(query);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kEmptyText) throw Error(ErrorCode::kEmptyQuery, e.what());
    throw;
  }
  RetrievalReport report = read([&](const TierStore& s) {
    return hmo::retrieve(s, query, embedded, k, mode, *ports.judge);
  });
  write([&](TierStore& s) {
    for (const auto& hit : report.hits) {
      if (s.contains(hit.record_id)) s.on_access(hit.record_id, t);
    }
  });
  return report;
}

Placement Engine::access(const RecordId& id, std::optional<UnixSeconds> now) {
  const UnixSeconds t = resolve(now);
  return write([&](TierStore& s) { return s.on_access(id, t); });
}

void Engine::force_rescore(std::optional<UnixSeconds> now) {
  const UnixSeconds t = resolve(now);
  write([&](TierStore& s) { s.force_rescore(t); });
}

bool Engine::apply_drift_gate(std::optional<UnixSeconds> now) {
  const UnixSeconds t = resolve(now);
  return write([&](TierStore& s) { return s.apply_drift_gate(t); });
}

PersonaView Engine::persona() const {
  return read([](const TierStore& s) {
    PersonaView view{s.persona(), 0.0};
    if (s.persona().vector && s.persona().anchor_vector) {
      view.drift = drift_distance(*s.persona().vector, *s.persona().anchor_vector);
    }
    return view;
  });
}

void Engine::set_persona_profile(std::string text, std::optional<UnixSeconds> now) {
  const UnixSeconds t = resolve(now);
  // The drift gate runs with the next mutation.
  write([&](TierStore& s) { s.set_persona_profile(std::move(text), t); });
}

TierStats Engine::tier_stats() const {
  return read([](const TierStore& s) { return s.tier_stats(); });
}

TierIndex Engine::tier_index() const {
  return read([](const TierStore& s) { return s.index(); });
}

std::uint64_t Engine::snapshot(std::optional<UnixSeconds> now) {
  if (!paths_) throw Error(ErrorCode::kInvalidArgument, "in-memory engine has no store directory");
  const UnixSeconds t = resolve(now);
  return write([&](TierStore& s) {
    SnapshotFile file;
    file.epoch = snapshot_epoch_ + 1;
    file.taken_at = t;
    file.config_hash = config_hash(s.config());
    file.state = s.export_state();
    write_snapshot(*paths_, file);
    snapshot_epoch_ = file.epoch;
    return file.epoch;
  });
}

}  // namespace hmo
