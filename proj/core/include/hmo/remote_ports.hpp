#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "hmo/ports.hpp"

namespace hmo {

// An OpenAI-compatible endpoint: base_url is the prefix that /chat/completions
// and /embeddings are appended to, e.g. "http://localhost:8000/v1".
struct RemoteEndpoint {
  std::string base_url;
  std::string api_key;
  std::string model;
  int timeout_seconds = 30;

  /// Reads <prefix>_BASE_URL, <prefix>_API_KEY and <prefix>_MODEL. Returns
  /// nullopt when the base URL is unset.
  static std::optional<RemoteEndpoint> from_env(std::string_view prefix);
};

class ChatClient {
 public:
  explicit ChatClient(RemoteEndpoint endpoint);

  /// POST {base_url}/chat/completions with one user message at temperature 0
  /// and returns choices[0].message.content. Throws kPortUnavailable on
  /// transport errors, non-2xx statuses or malformed responses.
  std::string complete(std::string_view prompt) const;

  const RemoteEndpoint& endpoint() const noexcept { return endpoint_; }

 private:
  RemoteEndpoint endpoint_;
};

/// Extracts the integer after "Score:" (or, failing that, the first integer in
/// the reply) and clamps it to [1, 10].
std::optional<int> parse_importance_reply(std::string_view reply);

class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(RemoteEndpoint endpoint, std::size_t dim);

  EmbeddingVector embed(std::string_view text) const override;
  std::size_t dimension() const override { return dim_; }

 private:
  RemoteEndpoint endpoint_;
  std::size_t dim_;
};

class RemoteImportanceEvaluator final : public ImportanceEvaluator {
 public:
  explicit RemoteImportanceEvaluator(RemoteEndpoint endpoint);

  // One retry on a failed call or unparsable reply, then the neutral score
  // with the fallback flag set.
  ImportanceResult evaluate(const MemorySegment& segment,
                            const PersonaState& persona) const override;

 private:
  ChatClient client_;
};

class RemoteCompressor final : public Compressor {
 public:
  explicit RemoteCompressor(RemoteEndpoint endpoint);
  // Failures surface as kPortFailure.
  std::string compress(const MemorySegment& segment) const override;

 private:
  ChatClient client_;
};

class RemoteSufficiencyJudge final : public SufficiencyJudge {
 public:
  RemoteSufficiencyJudge(RemoteEndpoint endpoint,
                         std::shared_ptr<const SufficiencyJudge> fallback);

  ReflectionVerdict judge(const SufficiencyQuery& query) const override;

 private:
  ChatClient client_;
  std::shared_ptr<const SufficiencyJudge> fallback_;
};

// EMA vector update plus a model rewrite of the profile text. If the model is
// unreachable the reference text update is used instead.
class RemotePersonaUpdater final : public PersonaUpdater {
 public:
  explicit RemotePersonaUpdater(RemoteEndpoint endpoint);

  PersonaState update(const PersonaState& persona,
                      const MemorySegment& segment) const override;

 private:
  ChatClient client_;
};

/// Reference ports, with each model-backed step swapped for a remote adapter
/// when HMO_LLM_BASE_URL / HMO_EMBED_BASE_URL are set.
Ports ports_from_env(const EngineConfig& cfg);

}  // namespace hmo
