#include <csignal>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "hmo/bench/replay.hpp"
#include "hmo/bench/workload.hpp"
#include "hmo/engine.hpp"
#include "hmo/error.hpp"
#include "hmo/remote_ports.hpp"
#include "hmo/service.hpp"
#include "hmo/storage.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitCorpus = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw hmo::Error(hmo::ErrorCode::kIoFailure, "cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

hmo::EngineConfig load_config(const std::string& path) {
  return path.empty() ? hmo::EngineConfig{} : hmo::config_from_json(read_file(path));
}

hmo::bench::Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hmo::Error(hmo::ErrorCode::kCorpusParseError, "cannot open corpus " + path);
  return hmo::bench::parse_corpus(in);
}

std::vector<hmo::RetrievalMode> modes_for(const std::string& name) {
  if (name == "all") {
    return {hmo::RetrievalMode::kTiered, hmo::RetrievalMode::kNoTier1, hmo::RetrievalMode::kGlobal};
  }
  return {hmo::retrieval_mode_from_string(name)};
}

void emit_csv(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw hmo::Error(hmo::ErrorCode::kIoFailure, "cannot write " + path);
}

int run_serve(const std::string& store_dir, const std::string& host, int port,
              const std::string& config_path) {
  hmo::EngineOptions options;
  if (!config_path.empty()) {
    options.config = load_config(config_path);
  } else if (!store_dir.empty()) {
    if (auto stored = hmo::read_config(hmo::StorePaths{store_dir})) options.config = *stored;
  }
  options.ports = hmo::ports_from_env(options.config);
  if (!store_dir.empty()) options.store_dir = store_dir;

  // Signals are taken by a dedicated thread so shutdown runs outside a handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  auto engine = hmo::Engine::open(std::move(options));
  const auto& report = engine->recovery_report();
  std::cerr << "recovered " << report.rows_restored + report.rows_replayed << " records";
  if (report.from_snapshot) std::cerr << " (snapshot epoch " << report.snapshot_epoch << ")";
  std::cerr << "\n";
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";

  hmo::Service service(*engine);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });
  std::cerr << "listening on " << host << ":" << port << "\n";
  const bool ok = service.listen(host, port);
  if (!ok) {
    std::cerr << "cannot listen on " << host << ":" << port << "\n";
    pthread_kill(waiter.native_handle(), SIGTERM);
  }
  waiter.join();
  if (engine->persistent()) {
    std::cerr << "snapshot epoch " << engine->snapshot() << "\n";
  }
  return ok ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical memory orchestration engine"};
  app.require_subcommand(1);

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string store_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string serve_config;
  serve->add_option("--store-dir", store_dir, "Store directory")->envname("HMO_STORE_DIR");
  serve->add_option("--port", port, "Listen port")->envname("HMO_PORT");
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--config", serve_config, "EngineConfig JSON file");

  auto* gen = app.add_subcommand("gen", "Generate a synthetic corpus");
  hmo::bench::WorkloadSpec spec;
  std::string gen_out = "-";
  gen->add_option("--seed", spec.seed);
  gen->add_option("--sessions", spec.sessions);
  gen->add_option("--turns", spec.turns_per_session, "Turns per session");
  gen->add_option("--topics", spec.topics);
  gen->add_option("--zipf", spec.zipf_s, "Zipf exponent of topic popularity");
  gen->add_option("--questions", spec.questions);
  gen->add_option("--locality", spec.locality, "Share of questions about recent popular turns");
  gen->add_option("-o,--output", gen_out, "Output file, - for stdout");

  auto* replay = app.add_subcommand("replay", "Replay a corpus and report metrics");
  std::string corpus_path;
  std::string mode_name = "tiered";
  std::string config_path;
  std::string csv_path;
  std::uint64_t seed = 0;
  replay->add_option("--corpus", corpus_path)->required();
  replay->add_option("--mode", mode_name, "tiered, no_tier1, global or all");
  replay->add_option("--config", config_path);
  replay->add_option("--csv", csv_path, "CSV output, stdout when omitted");
  replay->add_option("--seed", seed);

  auto* sweep = app.add_subcommand("sweep", "Replay once per parameter value");
  std::string param;
  std::vector<std::string> values;
  sweep->add_option("--param", param, "lambda, tau, theta, S, K or H")->required();
  sweep->add_option("--values", values)->delimiter(',')->required();
  sweep->add_option("--corpus", corpus_path)->required();
  sweep->add_option("--mode", mode_name);
  sweep->add_option("--config", config_path);
  sweep->add_option("--csv", csv_path);
  sweep->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (serve->parsed()) return run_serve(store_dir, host, port, serve_config);

    if (gen->parsed()) {
      const auto corpus = hmo::bench::generate_workload(spec);
      emit_csv(gen_out, hmo::bench::corpus_to_string(corpus));
      return 0;
    }

    const auto cfg = load_config(config_path);
    const auto corpus = load_corpus(corpus_path);
    std::string csv = hmo::bench::csv_header() + "\n";
    if (replay->parsed()) {
      for (auto mode : modes_for(mode_name)) {
        const auto report = hmo::bench::replay(corpus, mode, cfg, seed);
        csv += hmo::bench::csv_row(report, "", "") + "\n";
        std::cerr << hmo::to_string(mode) << ": recall@5 " << report.recall_at_5 << ", ndcg@5 "
                  << report.ndcg_at_5 << ", mean scanned " << report.mean_candidates_scanned
                  << ", wall " << report.total_wall_seconds << " s\n";
      }
    } else {
      for (auto mode : modes_for(mode_name)) {
        for (const auto& row : hmo::bench::sweep(corpus, mode, cfg, param, values, seed)) {
          csv += hmo::bench::csv_row(row.report, row.param, row.value) + "\n";
        }
      }
    }
    emit_csv(csv_path, csv);
    return 0;
  } catch (const hmo::Error& e) {
    std::cerr << "hmo: " << hmo::to_string(e.code()) << ": " << e.what() << "\n";
    return e.code() == hmo::ErrorCode::kCorpusParseError ? kExitCorpus : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "hmo: " << e.what() << "\n";
    return kExitFailure;
  }
}
