#include "hmo/bench/replay.hpp"

#include <chrono>
#include <cstdio>
#include <unordered_map>

#include "hmo/bench/metrics.hpp"
#include "hmo/engine.hpp"
#include "hmo/error.hpp"

namespace hmo::bench {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::int64_t parse_capacity(const std::string& value) {
  std::size_t used = 0;
  long long n = 0;
  try {
    n = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || n < 0) {
    throw Error(ErrorCode::kInvalidArgument, "'" + value + "' is not a non-negative integer");
  }
  return n;
}

double parse_real(const std::string& value) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size()) throw Error(ErrorCode::kInvalidArgument, "'" + value + "' is not a number");
  return x;
}

}  // namespace

MetricsReport replay(const Corpus& corpus, RetrievalMode mode, const EngineConfig& cfg,
                     std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  EngineOptions options;
  options.config = cfg;
  options.clock = [] { return UnixSeconds{0}; };
  auto engine = Engine::open(options);

  MetricsReport report;
  report.mode = mode;
  report.seed = seed;
  std::vector<std::string> ordinals;
  std::unordered_map<std::string, SessionId> sessions;
  std::optional<std::string> last_session;
  double recall_sum = 0.0;
  double ndcg_sum = 0.0;
  std::size_t deep = 0;

  for (const auto& event : corpus.events) {
    if (const auto* turn = std::get_if<TurnEvent>(&event)) {
      if (turn->session != last_session) {
        const auto known = sessions.find(turn->session);
        if (known == sessions.end()) sessions.emplace(turn->session, engine->begin_session(turn->ts));
        last_session = turn->session;
      }
      const auto result = engine->ingest(turn->q, turn->a, turn->ts, sessions.at(turn->session));
      ordinals.push_back(result.record_id.str());
      ++report.n_turns;
      continue;
    }
    const auto& question = std::get<QuestionEvent>(event);
    const auto k = static_cast<std::size_t>(question.k.value_or(kDefaultQuestionK));
    QuestionOutcome outcome;
    for (const auto& ref : question.evidence) {
      if (const auto* ordinal = std::get_if<std::int64_t>(&ref)) {
        outcome.evidence_ids.push_back(ordinals.at(static_cast<std::size_t>(*ordinal)));
      } else {
        outcome.evidence_ids.push_back(std::get<std::string>(ref));
      }
    }
    const RetrievalReport found = engine->retrieve(question.q, k, mode, question.ts);
    for (const auto& hit : found.hits) outcome.hit_ids.push_back(hit.record_id.str());
    outcome.candidates_scanned = found.candidates_scanned;
    outcome.deepest_tier = found.tiers_searched.empty() ? 0 : found.tiers_searched.back();
    outcome.recall = recall_at_k(outcome.evidence_ids, outcome.hit_ids, k);
    outcome.ndcg = ndcg_at_k(outcome.evidence_ids, outcome.hit_ids, k);
    recall_sum += outcome.recall;
    ndcg_sum += outcome.ndcg;
    report.total_candidates_scanned += outcome.candidates_scanned;
    if (outcome.deepest_tier == 3) ++deep;
    report.questions.push_back(std::move(outcome));
  }

  report.n_questions = report.questions.size();
  if (report.n_questions > 0) {
    const auto n = static_cast<double>(report.n_questions);
    report.recall_at_5 = recall_sum / n;
    report.ndcg_at_5 = ndcg_sum / n;
    report.mean_candidates_scanned = static_cast<double>(report.total_candidates_scanned) / n;
    report.tier3_rate = static_cast<double>(deep) / n;
  }
  report.total_wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

void apply_param(EngineConfig& cfg, const std::string& param, const std::string& value) {
  if (param == "lambda") {
    cfg.lambda = parse_real(value);
  } else if (param == "tau") {
    cfg.tau = parse_real(value);
  } else if (param == "theta") {
    cfg.reflect_threshold = parse_real(value);
  } else if (param == "S") {
    cfg.sessions_cached = parse_capacity(value);
  } else if (param == "K") {
    cfg.pivotal_k = parse_capacity(value);
  } else if (param == "H") {
    cfg.buffer_h = parse_capacity(value);
  } else {
    throw Error(ErrorCode::kUnknownParam,
                "unknown sweep parameter '" + param + "' (expected lambda, tau, theta, S, K or H)");
  }
  cfg.validate();
}

std::vector<SweepRow> sweep(const Corpus& corpus, RetrievalMode mode, const EngineConfig& base,
                            const std::string& param, const std::vector<std::string>& values,
                            std::uint64_t seed) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep needs at least one value");
  std::vector<EngineConfig> configs;
  for (const auto& v : values) {
    EngineConfig cfg = base;
    apply_param(cfg, param, v);
    configs.push_back(cfg);
  }
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) {
    rows.push_back({param, values[i], replay(corpus, mode, configs[i], seed)});
  }
  return rows;
}

std::string csv_header() {
  return "mode,param,value,seed,n_turns,n_questions,recall_at_5,ndcg_at_5,"
         "mean_candidates_scanned,total_candidates_scanned,tier3_rate";
}

std::string csv_row(const MetricsReport& r, const std::string& param, const std::string& value) {
  return std::string(to_string(r.mode)) + "," + param + "," + value + "," + std::to_string(r.seed) +
         "," + std::to_string(r.n_turns) + "," + std::to_string(r.n_questions) + "," +
         format_double(r.recall_at_5) + "," + format_double(r.ndcg_at_5) + "," +
         format_double(r.mean_candidates_scanned) + "," +
         std::to_string(r.total_candidates_scanned) + "," + format_double(r.tier3_rate);
}

}  // namespace hmo::bench
