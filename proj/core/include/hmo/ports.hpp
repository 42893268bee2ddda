#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "hmo/config.hpp"
#include "hmo/model.hpp"

namespace hmo {

enum class RubricLabel { kPivotal, kHighUtility, kInformative, kTransient };

struct ImportanceRubricBand {
  int min_score;
  int max_score;
  RubricLabel label;
};

inline constexpr std::array<ImportanceRubricBand, 4> kImportanceRubric{{
    {9, 10, RubricLabel::kPivotal},
    {7, 8, RubricLabel::kHighUtility},
    {4, 6, RubricLabel::kInformative},
    {1, 3, RubricLabel::kTransient},
}};

/// Band containing `score`; scores outside [1, 10] are clamped first.
RubricLabel rubric_label(int score);
std::string_view to_string(RubricLabel label);

// Neutral importance used when an evaluator cannot produce a score. It is the
// middle of the Informative band.
inline constexpr int kFallbackImportance = 5;

// Token a remote model emits to ask for a deeper tier search.
inline constexpr std::string_view kSearchDeeperToken = "<SEARCH_DEEPER>";

struct ImportanceResult {
  int score = kFallbackImportance;
  bool fallback = false;
};

enum class VerdictKind { kSufficient, kNeedsDeeperSearch };
enum class VerdictSource { kHeuristic, kRemote };

struct ReflectionVerdict {
  VerdictKind kind = VerdictKind::kNeedsDeeperSearch;
  VerdictSource source = VerdictSource::kHeuristic;

  bool sufficient() const noexcept { return kind == VerdictKind::kSufficient; }
  friend bool operator==(const ReflectionVerdict&, const ReflectionVerdict&) = default;
};

std::string_view to_string(VerdictKind kind);
std::string_view to_string(VerdictSource source);

struct JudgedHit {
  const MemorySegment* segment = nullptr;
  double similarity = 0.0;
};

struct SufficiencyQuery {
  std::string_view query_text;
  const EmbeddingVector* query_embedding = nullptr;
  // Sorted by similarity, descending.
  std::span<const JudgedHit> hits;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  /// Unit-norm embedding of `text`. Throws kEmptyText for blank input and
  /// kPortUnavailable when a remote endpoint cannot be reached.
  virtual EmbeddingVector embed(std::string_view text) const = 0;
  virtual std::size_t dimension() const = 0;
};

class ImportanceEvaluator {
 public:
  virtual ~ImportanceEvaluator() = default;
  /// Always returns a score in [1, 10].
  virtual ImportanceResult evaluate(const MemorySegment& segment,
                                    const PersonaState& persona) const = 0;
};

class Compressor {
 public:
  virtual ~Compressor() = default;
  virtual std::string compress(const MemorySegment& segment) const = 0;
};

class SufficiencyJudge {
 public:
  virtual ~SufficiencyJudge() = default;
  virtual ReflectionVerdict judge(const SufficiencyQuery& query) const = 0;
};

class PersonaUpdater {
 public:
  virtual ~PersonaUpdater() = default;
  /// Folds one segment into the persona. Never touches anchor_vector.
  virtual PersonaState update(const PersonaState& persona,
                              const MemorySegment& segment) const = 0;
};

// The model-dependent steps an engine is wired with. Implementations must be
// callable from several threads at once.
struct Ports {
  std::shared_ptr<const Embedder> embedder;
  std::shared_ptr<const ImportanceEvaluator> importance;
  std::shared_ptr<const Compressor> compressor;
  std::shared_ptr<const SufficiencyJudge> judge;
  std::shared_ptr<const PersonaUpdater> persona;

  /// Deterministic reference implementations parameterized by `cfg`.
  static Ports reference(const EngineConfig& cfg);
};

}  // namespace hmo
