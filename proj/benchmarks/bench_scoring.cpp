#include <benchmark/benchmark.h>

#include <random>

#include "hmo/reference_ports.hpp"
#include "hmo/scoring.hpp"

namespace {

using namespace hmo;

void BM_PriorityScore(benchmark::State& state) {
  const EngineConfig cfg;
  std::mt19937_64 rng(1);
  std::vector<MemoryHeader> headers(1024);
  for (auto& h : headers) {
    h.importance = 1 + static_cast<int>(rng() % 10);
    h.persona_sim = static_cast<double>(rng() % 1000) / 1000.0;
    h.recall_count = 1 + static_cast<std::int64_t>(rng() % 100);
    h.last_access = 1'700'000'000 - static_cast<UnixSeconds>(rng() % 100'000);
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(priority_score(headers[i++ & 1023], 1'700'000'000, cfg).total);
  }
}
BENCHMARK(BM_PriorityScore);

void BM_RescoreActive(benchmark::State& state) {
  const EngineConfig cfg;
  const HashingEmbedder embedder(256);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<MemorySegment> segments(n);
  std::vector<MemoryHeader> headers(n);
  std::vector<ActiveRecord> active;
  for (std::size_t i = 0; i < n; ++i) {
    segments[i].embedding = embedder.embed("record " + std::to_string(i) + " body " + std::to_string(i * 7));
    active.push_back({&segments[i], &headers[i]});
  }
  PersonaState persona;
  persona.vector = embedder.embed("persona text");
  std::uint64_t epoch = 0;
  for (auto _ : state) {
    epoch = rescore_active(active, persona, 1'700'000'000, cfg, epoch);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_RescoreActive)->Arg(50)->Arg(255);

void BM_Embed(benchmark::State& state) {
  const HashingEmbedder embedder(256);
  const std::string text = "Can you note the harbor schedule for the late ferry and the morning bus?";
  for (auto _ : state) benchmark::DoNotOptimize(embedder.embed(text));
}
BENCHMARK(BM_Embed);

}  // namespace

BENCHMARK_MAIN();
