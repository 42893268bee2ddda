#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hmo/ports.hpp"

namespace hmo {

/// Lowercased ASCII alphanumeric runs; bytes >= 0x80 count as word bytes so
/// UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

/// Number of distinct tokens in `text`.
std::size_t distinct_token_count(std::string_view text);

/// Feature hashing: each token adds 1 to bucket fnv1a64(token) % dim, then the
/// term-frequency vector is L2-normalized.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dim);

  EmbeddingVector embed(std::string_view text) const override;
  std::size_t dimension() const override { return dim_; }

  static std::size_t bucket(std::string_view token, std::size_t dim);

 private:
  std::size_t dim_;
};

// round(3 + 4 * sim(segment, persona) + 3 * min(1, distinct_tokens / 50)),
// clamped to [1, 10]. Similarity and lexical richness stand in for the
// qualitative rubric dimensions.
class ReferenceImportanceEvaluator final : public ImportanceEvaluator {
 public:
  ImportanceResult evaluate(const MemorySegment& segment,
                            const PersonaState& persona) const override;
};

// Keeps the full query plus the first two and last two answer sentences.
class ReferenceCompressor final : public Compressor {
 public:
  std::string compress(const MemorySegment& segment) const override;
};

/// Splits on '.', '!' or '?' followed by whitespace (or end of text). Returned
/// sentences are trimmed and keep their terminal punctuation.
std::vector<std::string> split_sentences(std::string_view text);

inline constexpr std::string_view kEllipsisMarker = " [...] ";

// Sufficient iff at least `min_hits` hits reach `threshold`.
class HeuristicSufficiencyJudge final : public SufficiencyJudge {
 public:
  HeuristicSufficiencyJudge(double threshold, std::int64_t min_hits)
      : threshold_(threshold), min_hits_(min_hits) {}

  ReflectionVerdict judge(const SufficiencyQuery& query) const override;

 private:
  double threshold_;
  std::int64_t min_hits_;
};

// vector <- normalize((1 - rate) * vector + rate * segment), rate taken from
// the persona. The profile text gains up to kNovelTokensPerUpdate tokens of
// the segment that it does not contain yet.
class EmaPersonaUpdater final : public PersonaUpdater {
 public:
  static constexpr std::size_t kNovelTokensPerUpdate = 5;
  static constexpr std::size_t kMaxProfileTokens = 128;

  PersonaState update(const PersonaState& persona,
                      const MemorySegment& segment) const override;

  /// The vector part alone.
  static EmbeddingVector blend(const EmbeddingVector& persona,
                               const EmbeddingVector& segment, double rate);
};

}  // namespace hmo
