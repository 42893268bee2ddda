#include <benchmark/benchmark.h>

#include <map>

#include "hmo/bench/workload.hpp"
#include "hmo/engine.hpp"

namespace {

using namespace hmo;

// Engine loaded with a generated corpus plus its question texts.
struct Loaded {
  std::unique_ptr<Engine> engine;
  std::vector<std::string> questions;
  UnixSeconds last_ts = 0;
};

Loaded load(std::int64_t sessions) {
  bench::WorkloadSpec spec;
  spec.sessions = sessions;
  spec.questions = 200;
  const auto corpus = bench::generate_workload(spec);
  Loaded out;
  out.engine = Engine::open(EngineOptions{});
  std::map<std::string, SessionId> ids;
  for (const auto& ev : corpus.events) {
    if (const auto* t = std::get_if<bench::TurnEvent>(&ev)) {
      auto it = ids.find(t->session);
      if (it == ids.end()) it = ids.emplace(t->session, out.engine->begin_session(t->ts)).first;
      out.engine->ingest(t->q, t->a, t->ts, it->second);
      out.last_ts = t->ts;
    } else {
      out.questions.push_back(std::get<bench::QuestionEvent>(ev).q);
    }
  }
  return out;
}

void BM_Retrieve(benchmark::State& state) {
  static std::map<std::int64_t, Loaded> cache;
  auto& loaded = cache.try_emplace(state.range(0), load(state.range(0))).first->second;
  const auto mode = static_cast<RetrievalMode>(state.range(1));
  std::size_t i = 0;
  UnixSeconds now = loaded.last_ts;
  std::uint64_t scanned = 0;
  for (auto _ : state) {
    const auto r = loaded.engine->retrieve(loaded.questions[i++ % loaded.questions.size()], 5, mode, ++now);
    scanned += r.candidates_scanned;
  }
  state.counters["scanned/query"] =
      benchmark::Counter(static_cast<double>(scanned) / static_cast<double>(state.iterations()));
  state.SetLabel(std::string(to_string(mode)));
}
BENCHMARK(BM_Retrieve)
    ->ArgsProduct({{80, 400}, {static_cast<int>(RetrievalMode::kTiered), static_cast<int>(RetrievalMode::kNoTier1),
                               static_cast<int>(RetrievalMode::kGlobal)}})
    ->Unit(benchmark::kMicrosecond);

void BM_Ingest(benchmark::State& state) {
  auto engine = Engine::open(EngineOptions{});
  UnixSeconds now = 1'700'000'000;
  std::int64_t n = 0;
  for (auto _ : state) {
    engine->ingest("Can you note item " + std::to_string(n) + " for later?", "Noted: value " + std::to_string(n * 13),
                   now += 60);
    ++n;
  }
}
BENCHMARK(BM_Ingest)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
