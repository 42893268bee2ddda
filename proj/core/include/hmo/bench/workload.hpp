#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hmo/model.hpp"

namespace hmo::bench {

struct WorkloadSpec {
  std::uint64_t seed = 42;
  std::int64_t sessions = 20;
  std::int64_t turns_per_session = 25;
  std::int64_t topics = 8;
  double zipf_s = 1.1;
  std::int64_t questions = 200;
  double locality = 0.8;
  UnixSeconds start_ts = 1'700'000'000;
  std::int64_t turn_interval = 60;
  std::int64_t session_interval = 86'400;
  // Pool of the most popular topic's latest turns that local questions target.
  std::int64_t recent_window = 10;

  /// Throws kInvalidArgument for non-positive counts or a locality outside [0, 1].
  void validate() const;
};

struct TurnEvent {
  std::string session;
  std::string q;
  std::string a;
  UnixSeconds ts = 0;
};

// An evidence reference: a turn ordinal (0-based) or a record id.
using EvidenceRef = std::variant<std::int64_t, std::string>;

struct QuestionEvent {
  std::string q;
  std::vector<EvidenceRef> evidence;
  UnixSeconds ts = 0;
  std::optional<std::int64_t> k;
};

using CorpusEvent = std::variant<TurnEvent, QuestionEvent>;

struct Corpus {
  std::vector<CorpusEvent> events;

  std::size_t turn_count() const;
  std::size_t question_count() const;
};

/// Deterministic for a given spec.
Corpus generate_workload(const WorkloadSpec& spec);

/// One JSON object per line.
void write_corpus(const Corpus& corpus, std::ostream& out);
std::string corpus_to_string(const Corpus& corpus);

/// Throws kCorpusParseError naming the 1-based line on malformed JSON,
/// unknown event types, decreasing timestamps or evidence that does not
/// point at an earlier turn.
Corpus parse_corpus(std::istream& in);
Corpus parse_corpus_string(const std::string& text);

}  // namespace hmo::bench
