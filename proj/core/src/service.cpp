#include "hmo/service.hpp"

#include <httplib.h>
#include <json.hpp>

#include "hmo/error.hpp"

namespace hmo {

namespace {

using nlohmann::json;

class BadRequest : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ApiResponse api_error(int status, std::string_view code, const std::string& message) {
  return {status, json{{"code", code}, {"message", message}}.dump()};
}

ApiResponse from_error(const Error& e) {
  const std::string message = std::string(to_string(e.code())) + ": " + e.what();
  switch (e.code()) {
    case ErrorCode::kUnknownSession:
    case ErrorCode::kUnknownRecord:
      return api_error(404, "NotFound", message);
    case ErrorCode::kPortUnavailable:
    case ErrorCode::kPortFailure:
      return api_error(503, "PortUnavailable", message);
    case ErrorCode::kIoFailure:
    case ErrorCode::kIdOrderViolation:
    case ErrorCode::kConfigMismatch:
    case ErrorCode::kCorruptLine:
      return api_error(500, "Internal", message);
    default:
      return api_error(400, "BadRequest", message);
  }
}

json parse_body(std::string_view body) {
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw BadRequest("body must be a JSON object");
  return j;
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw BadRequest(std::string("field '") + key + "' has the wrong type");
  }
}

json stats_json(const TierStats& s) {
  auto range = [](const std::optional<ScoreRange>& r) {
    return r ? json{{"min", r->min}, {"max", r->max}} : json(nullptr);
  };
  return json{{"recency", s.recency},
              {"pivotal", s.pivotal},
              {"buffer", s.buffer},
              {"archive_only", s.archive_only},
              {"archive_size", s.archive_size},
              {"recency_sessions", s.recency_sessions},
              {"score_epoch", s.score_epoch},
              {"scores",
               {{"recency", range(s.recency_scores)},
                {"pivotal", range(s.pivotal_scores)},
                {"buffer", range(s.buffer_scores)},
                {"archive", range(s.archive_scores)}}}};
}

}  // namespace

struct Service::Impl {
  httplib::Server server;
};

Service::Service(Engine& engine) : engine_(engine), impl_(std::make_unique<Impl>()) {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const ApiResponse out = dispatch(req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  for (const char* path : {"/v1/sessions", "/v1/memories", "/v1/retrieve", "/v1/persona",
                           "/v1/snapshot"}) {
    impl_->server.Post(path, route);
  }
  impl_->server.Get("/v1/persona", route);
  impl_->server.Get("/v1/tiers/stats", route);
  impl_->server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const ApiResponse out =
        api_error(res.status, res.status == 404 ? "NotFound" : "BadRequest",
                  "no route for this request");
    res.set_content(out.body, "application/json");
  });
}

Service::~Service() { stop(); }

ApiResponse Service::dispatch(std::string_view method, std::string_view path,
                              std::string_view body) {
  try {
    if (method == "POST" && path == "/v1/sessions") {
      return {200, json{{"session_id", engine_.begin_session()}}.dump()};
    }
    if (method == "POST" && path == "/v1/memories") {
      const json j = parse_body(body);
      const auto query = optional_field<std::string>(j, "query").value_or("");
      const auto answer = optional_field<std::string>(j, "answer").value_or("");
      const auto session = optional_field<std::string>(j, "session_id");
      const UnixSeconds ts = optional_field<UnixSeconds>(j, "ts").value_or(system_clock_now());
      const IngestResult r = engine_.ingest(query, answer, ts, session);
      return {200, json{{"record_id", r.record_id.str()},
                        {"session_id", r.session_id},
                        {"importance", r.importance},
                        {"placement", to_string(r.placement)},
                        {"kind", to_string(r.kind)},
                        {"ts", ts}}
                       .dump()};
    }
    if (method == "POST" && path == "/v1/retrieve") {
      const json j = parse_body(body);
      const auto query = optional_field<std::string>(j, "query").value_or("");
      const auto k = optional_field<std::int64_t>(j, "k").value_or(5);
      if (k < 1) throw BadRequest("k must be at least 1");
      const auto mode =
          retrieval_mode_from_string(optional_field<std::string>(j, "mode").value_or("tiered"));
      const auto ts = optional_field<UnixSeconds>(j, "ts");
      const RetrievalReport report =
          engine_.retrieve(query, static_cast<std::size_t>(k), mode, ts);
      json hits = json::array();
      for (const auto& h : report.hits) {
        const std::string text = engine_.read([&](const TierStore& s) {
          return s.contains(h.record_id) ? s.segment(s.index_of(h.record_id)).content() : "";
        });
        hits.push_back({{"id", h.record_id.str()},
                        {"rank", h.rank},
                        {"similarity", h.similarity},
                        {"tier", tier_number(h.placement_at_hit)},
                        {"placement", to_string(h.placement_at_hit)},
                        {"text", text}});
      }
      json verdicts = json::array();
      for (const auto& v : report.verdicts) {
        verdicts.push_back({{"kind", to_string(v.kind)}, {"source", to_string(v.source)}});
      }
      return {200, json{{"hits", hits},
                        {"tiers_searched", report.tiers_searched},
                        {"candidates_scanned", report.candidates_scanned},
                        {"verdicts", verdicts},
                        {"mode", to_string(mode)}}
                       .dump()};
    }
    if (path == "/v1/persona" && (method == "GET" || method == "POST")) {
      if (method == "POST") {
        const json j = parse_body(body);
        engine_.set_persona_profile(optional_field<std::string>(j, "profile_text").value_or(""),
                                    optional_field<UnixSeconds>(j, "ts"));
      }
      const PersonaView view = engine_.persona();
      return {200, json{{"profile_text", view.state.profile_text},
                        {"drift", view.drift},
                        {"has_vector", view.state.vector.has_value()},
                        {"has_anchor", view.state.anchor_vector.has_value()},
                        {"updated_at", view.state.updated_at}}
                       .dump()};
    }
    if (method == "GET" && path == "/v1/tiers/stats") {
      return {200, stats_json(engine_.tier_stats()).dump()};
    }
    if (method == "POST" && path == "/v1/snapshot") {
      if (!engine_.persistent()) throw BadRequest("engine has no store directory");
      return {200, json{{"epoch", engine_.snapshot()}}.dump()};
    }
    return api_error(404, "NotFound",
                     "no route for " + std::string(method) + " " + std::string(path));
  } catch (const BadRequest& e) {
    return api_error(400, "BadRequest", e.what());
  } catch (const Error& e) {
    return from_error(e);
  } catch (const std::exception& e) {
    return api_error(500, "Internal", e.what());
  }
}

bool Service::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int Service::bind_to_any_port(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace hmo
