#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hmo/bench/workload.hpp"
#include "hmo/config.hpp"
#include "hmo/retrieval.hpp"

namespace hmo::bench {

inline constexpr std::size_t kDefaultQuestionK = 5;

struct QuestionOutcome {
  std::vector<std::string> hit_ids;
  std::vector<std::string> evidence_ids;
  std::uint64_t candidates_scanned = 0;
  int deepest_tier = 0;
  int recall = 0;
  double ndcg = 0.0;
};

struct MetricsReport {
  RetrievalMode mode = RetrievalMode::kTiered;
  std::uint64_t seed = 0;
  std::size_t n_turns = 0;
  std::size_t n_questions = 0;
  double recall_at_5 = 0.0;
  double ndcg_at_5 = 0.0;
  double mean_candidates_scanned = 0.0;
  std::uint64_t total_candidates_scanned = 0;
  // Share of questions whose search reached the archive tier.
  double tier3_rate = 0.0;
  // Informational only; kept out of the CSV.
  double total_wall_seconds = 0.0;
  std::vector<QuestionOutcome> questions;
};

/// Replays the corpus into a fresh in-memory engine with reference ports and
/// a clock pinned to the event timestamps. `seed` is recorded in the report.
MetricsReport replay(const Corpus& corpus, RetrievalMode mode, const EngineConfig& cfg,
                     std::uint64_t seed = 0);

/// Sets a sweepable parameter: lambda, tau, theta, S, K or H. Throws
/// kUnknownParam for any other name, kInvalidArgument for a bad value.
void apply_param(EngineConfig& cfg, const std::string& param, const std::string& value);

struct SweepRow {
  std::string param;
  std::string value;
  MetricsReport report;
};

/// One fresh replay per value. Throws kInvalidArgument on an empty list.
std::vector<SweepRow> sweep(const Corpus& corpus, RetrievalMode mode, const EngineConfig& base,
                            const std::string& param, const std::vector<std::string>& values,
                            std::uint64_t seed = 0);

/// Columns: mode,param,value,seed,n_turns,n_questions,recall_at_5,ndcg_at_5,
/// mean_candidates_scanned,total_candidates_scanned,tier3_rate
std::string csv_header();
std::string csv_row(const MetricsReport& report, const std::string& param,
                    const std::string& value);

}  // namespace hmo::bench
