#include "hmo/remote_ports.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <regex>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "hmo/error.hpp"
#include "hmo/prompts.hpp"
#include "hmo/reference_ports.hpp"

namespace hmo {

namespace {

using nlohmann::json;

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix without trailing slash
};

SplitUrl split_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = base_url.find('/', host_start);
  SplitUrl out;
  out.origin = base_url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : base_url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

json post_json(const RemoteEndpoint& endpoint, const std::string& route, const json& body) {
  const auto url = split_url(endpoint.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(endpoint.timeout_seconds, 0);
  client.set_read_timeout(endpoint.timeout_seconds, 0);
  client.set_write_timeout(endpoint.timeout_seconds, 0);
  httplib::Headers headers;
  if (!endpoint.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint.api_key);
  }
  auto res = client.Post(url.path + route, headers, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kPortUnavailable,
                "request to " + endpoint.base_url + route + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::kPortUnavailable, "request to " + endpoint.base_url + route +
                                                 " returned HTTP " + std::to_string(res->status));
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kPortUnavailable, std::string("malformed JSON response: ") + e.what());
  }
}

std::string trimmed(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string getenv_or_empty(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  return v == nullptr ? std::string() : std::string(v);
}

}  // namespace

std::optional<RemoteEndpoint> RemoteEndpoint::from_env(std::string_view prefix) {
  const std::string p(prefix);
  RemoteEndpoint endpoint;
  endpoint.base_url = getenv_or_empty(p + "_BASE_URL");
  if (endpoint.base_url.empty()) return std::nullopt;
  endpoint.api_key = getenv_or_empty(p + "_API_KEY");
  endpoint.model = getenv_or_empty(p + "_MODEL");
  if (const auto t = getenv_or_empty(p + "_TIMEOUT"); !t.empty()) {
    endpoint.timeout_seconds = std::max(1, std::atoi(t.c_str()));
  }
  return endpoint;
}

ChatClient::ChatClient(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::string ChatClient::complete(std::string_view prompt) const {
  const json body{{"model", endpoint_.model},
                  {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
                  {"temperature", 0}};
  const json reply = post_json(endpoint_, "/chat/completions", body);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kPortUnavailable, "chat completion without choices[0].message.content");
  }
}

std::optional<int> parse_importance_reply(std::string_view reply) {
  static const std::regex kScored(R"(score\s*:\s*\[?\s*(-?\d+))", std::regex::icase);
  static const std::regex kAnyInt(R"(-?\d+)");
  const std::string text(reply);
  std::smatch m;
  std::string digits;
  if (std::regex_search(text, m, kScored)) {
    digits = m[1].str();
  } else if (std::regex_search(text, m, kAnyInt)) {
    digits = m[0].str();
  } else {
    return std::nullopt;
  }
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec == std::errc::result_out_of_range) return digits.front() == '-' ? 1 : 10;
  if (ec != std::errc()) return std::nullopt;
  return static_cast<int>(std::clamp<long long>(value, 1, 10));
}

RemoteEmbedder::RemoteEmbedder(RemoteEndpoint endpoint, std::size_t dim)
    : endpoint_(std::move(endpoint)), dim_(dim) {}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) const {
  if (trimmed(std::string(text)).empty()) {
    throw Error(ErrorCode::kEmptyText, "cannot embed blank text");
  }
  const json reply =
      post_json(endpoint_, "/embeddings", json{{"model", endpoint_.model}, {"input", text}});
  std::vector<double> values;
  try {
    values = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kPortUnavailable, "embedding response without data[0].embedding");
  }
  return normalize_embedding(values, dim_);
}

RemoteImportanceEvaluator::RemoteImportanceEvaluator(RemoteEndpoint endpoint)
    : client_(std::move(endpoint)) {}

ImportanceResult RemoteImportanceEvaluator::evaluate(const MemorySegment& segment,
                                                     const PersonaState& persona) const {
  const auto prompt = prompts::render(
      prompts::kImportanceScoring,
      {{"user_persona", persona.profile_text.empty() ? "(not yet known)" : persona.profile_text},
       {"memory_content", segment.content()}});
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      if (auto score = parse_importance_reply(client_.complete(prompt))) return {*score, false};
    } catch (const Error&) {
      // Transport failures get the same single retry as parse failures.
    }
  }
  return {kFallbackImportance, true};
}

RemoteCompressor::RemoteCompressor(RemoteEndpoint endpoint) : client_(std::move(endpoint)) {}

std::string RemoteCompressor::compress(const MemorySegment& segment) const {
  const auto prompt = prompts::render(prompts::kCompression,
                                      {{"memory_content", segment.query_text + "\n" + segment.answer_text}});
  std::string note;
  try {
    note = trimmed(client_.complete(prompt));
  } catch (const Error& e) {
    throw Error(ErrorCode::kPortFailure, std::string("compression failed: ") + e.what());
  }
  if (note.empty()) throw Error(ErrorCode::kPortFailure, "compression returned an empty note");
  return note;
}

RemoteSufficiencyJudge::RemoteSufficiencyJudge(RemoteEndpoint endpoint,
                                               std::shared_ptr<const SufficiencyJudge> fallback)
    : client_(std::move(endpoint)), fallback_(std::move(fallback)) {}

ReflectionVerdict RemoteSufficiencyJudge::judge(const SufficiencyQuery& query) const {
  std::ostringstream memories;
  int n = 0;
  for (const auto& hit : query.hits) {
    memories << ++n << ". (similarity " << hit.similarity << ") "
             << (hit.segment != nullptr ? hit.segment->content() : std::string()) << "\n";
  }
  if (n == 0) memories << "(none)\n";
  const auto prompt = prompts::render(prompts::kSufficiencyCheck,
                                      {{"query", std::string(query.query_text)}, {"memories", memories.str()}});
  try {
    const auto reply = client_.complete(prompt);
    const bool deeper = reply.find(kSearchDeeperToken) != std::string::npos;
    return {deeper ? VerdictKind::kNeedsDeeperSearch : VerdictKind::kSufficient,
            VerdictSource::kRemote};
  } catch (const Error&) {
    return fallback_->judge(query);
  }
}

RemotePersonaUpdater::RemotePersonaUpdater(RemoteEndpoint endpoint)
    : client_(std::move(endpoint)) {}

PersonaState RemotePersonaUpdater::update(const PersonaState& persona,
                                          const MemorySegment& segment) const {
  PersonaState next = EmaPersonaUpdater().update(persona, segment);
  const auto prompt = prompts::render(
      prompts::kPersonaRewrite,
      {{"user_persona", persona.profile_text.empty() ? "(empty)" : persona.profile_text},
       {"memory_content", segment.content()}});
  try {
    if (auto text = trimmed(client_.complete(prompt)); !text.empty()) {
      next.profile_text = std::move(text);
    }
  } catch (const Error&) {
    // Keep the reference text update.
  }
  return next;
}

Ports ports_from_env(const EngineConfig& cfg) {
  Ports ports = Ports::reference(cfg);
  if (auto llm = RemoteEndpoint::from_env("HMO_LLM")) {
    ports.importance = std::make_shared<RemoteImportanceEvaluator>(*llm);
    ports.compressor = std::make_shared<RemoteCompressor>(*llm);
    ports.judge = std::make_shared<RemoteSufficiencyJudge>(*llm, ports.judge);
    ports.persona = std::make_shared<RemotePersonaUpdater>(*llm);
  }
  if (auto embed = RemoteEndpoint::from_env("HMO_EMBED")) {
    ports.embedder =
        std::make_shared<RemoteEmbedder>(*embed, static_cast<std::size_t>(cfg.embed_dim));
  }
  return ports;
}

}  // namespace hmo
