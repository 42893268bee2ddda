#include "hmo/config.hpp"

#include <json.hpp>

#include "hmo/error.hpp"

namespace hmo {

namespace {

using nlohmann::json;

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidConfig, what);
}

json to_json(const EngineConfig& c) {
  // nlohmann::json objects keep keys sorted, which makes dump() canonical.
  return json{{"alpha", c.alpha},
              {"beta", c.beta},
              {"lambda", c.lambda},
              {"tau", c.tau},
              {"sessions_cached", c.sessions_cached},
              {"pivotal_k", c.pivotal_k},
              {"buffer_h", c.buffer_h},
              {"embed_dim", c.embed_dim},
              {"reflect_threshold", c.reflect_threshold},
              {"reflect_min_hits", c.reflect_min_hits},
              {"compress_threshold_chars", c.compress_threshold_chars},
              {"session_gap_seconds", c.session_gap_seconds},
              {"persona_ema_rate", c.persona_ema_rate}};
}

}  // namespace

void EngineConfig::validate() const {
  require(alpha >= 0.0 && beta >= 0.0, "alpha and beta must be non-negative");
  require(lambda >= 0.0, "lambda must be non-negative");
  require(tau >= 0.0, "tau must be non-negative");
  require(sessions_cached >= 0 && pivotal_k >= 0 && buffer_h >= 0,
          "tier capacities must be non-negative");
  require(embed_dim >= 1, "embed_dim must be at least 1");
  require(reflect_min_hits >= 0, "reflect_min_hits must be non-negative");
  require(compress_threshold_chars >= 0, "compress_threshold_chars must be non-negative");
  require(session_gap_seconds >= 0, "session_gap_seconds must be non-negative");
  require(persona_ema_rate >= 0.0 && persona_ema_rate <= 1.0,
          "persona_ema_rate must lie in [0, 1]");
}

std::string to_canonical_json(const EngineConfig& cfg) { return to_json(cfg).dump(); }

EngineConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  require(j.is_object(), "config must be a JSON object");

  EngineConfig cfg;
  const json defaults = to_json(cfg);
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) {
      throw Error(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
    }
    require(value.is_number(), "config values must be numbers");
  }
  try {
    auto real = [&](const char* key, double& field) {
      if (j.contains(key)) field = j.at(key).get<double>();
    };
    auto integer = [&](const char* key, std::int64_t& field) {
      if (!j.contains(key)) return;
      require(j.at(key).is_number_integer(), "capacity fields must be integers");
      field = j.at(key).get<std::int64_t>();
    };
    real("alpha", cfg.alpha);
    real("beta", cfg.beta);
    real("lambda", cfg.lambda);
    real("tau", cfg.tau);
    integer("sessions_cached", cfg.sessions_cached);
    integer("pivotal_k", cfg.pivotal_k);
    integer("buffer_h", cfg.buffer_h);
    integer("embed_dim", cfg.embed_dim);
    real("reflect_threshold", cfg.reflect_threshold);
    integer("reflect_min_hits", cfg.reflect_min_hits);
    integer("compress_threshold_chars", cfg.compress_threshold_chars);
    integer("session_gap_seconds", cfg.session_gap_seconds);
    real("persona_ema_rate", cfg.persona_ema_rate);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
  cfg.validate();
  return cfg;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const EngineConfig& cfg) { return fnv1a64(to_canonical_json(cfg)); }

}  // namespace hmo
