#include "hmo/reference_ports.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "hmo/error.hpp"

namespace hmo {

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t distinct_token_count(std::string_view text) {
  const auto tokens = tokenize(text);
  return std::unordered_set<std::string>(tokens.begin(), tokens.end()).size();
}

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw Error(ErrorCode::kInvalidConfig, "embedding dimension must be positive");
}

std::size_t HashingEmbedder::bucket(std::string_view token, std::size_t dim) {
  return static_cast<std::size_t>(fnv1a64(token) % dim);
}

EmbeddingVector HashingEmbedder::embed(std::string_view text) const {
  if (trim(text).empty()) throw Error(ErrorCode::kEmptyText, "cannot embed blank text");
  std::vector<double> tf(dim_, 0.0);
  for (const auto& token : tokenize(text)) tf[bucket(token, dim_)] += 1.0;
  try {
    return normalize_embedding(tf);
  } catch (const Error&) {
    throw Error(ErrorCode::kEmptyText, "text has no word tokens");
  }
}

ImportanceResult ReferenceImportanceEvaluator::evaluate(const MemorySegment& segment,
                                                        const PersonaState& persona) const {
  const double sim = persona_similarity(segment.embedding, persona);
  const double richness =
      std::min(1.0, static_cast<double>(distinct_token_count(segment.content())) / 50.0);
  const long raw = std::lround(3.0 + 4.0 * sim + 3.0 * richness);
  return {static_cast<int>(std::clamp<long>(raw, 1, 10)), false};
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    auto s = trim(text.substr(start, end - start));
    if (!s.empty()) out.emplace_back(s);
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    const bool at_end = i + 1 == text.size();
    if (at_end || std::isspace(static_cast<unsigned char>(text[i + 1])) != 0) flush(i + 1);
  }
  flush(text.size());
  return out;
}

std::string ReferenceCompressor::compress(const MemorySegment& segment) const {
  const auto sentences = split_sentences(segment.answer_text);
  std::string body;
  auto join = [&body](auto first, auto last) {
    for (auto it = first; it != last; ++it) {
      if (!body.empty() && body.back() != ' ') body += ' ';
      body += *it;
    }
  };
  if (sentences.size() <= 4) {
    join(sentences.begin(), sentences.end());
  } else {
    join(sentences.begin(), sentences.begin() + 2);
    body += kEllipsisMarker;
    join(sentences.end() - 2, sentences.end());
  }
  if (segment.query_text.empty()) return body;
  if (body.empty()) return segment.query_text;
  return segment.query_text + "\n" + body;
}

ReflectionVerdict HeuristicSufficiencyJudge::judge(const SufficiencyQuery& query) const {
  const auto strong = std::count_if(query.hits.begin(), query.hits.end(), [&](const JudgedHit& h) {
    return h.similarity >= threshold_;
  });
  const bool enough = strong >= min_hits_;
  return {enough ? VerdictKind::kSufficient : VerdictKind::kNeedsDeeperSearch,
          VerdictSource::kHeuristic};
}

EmbeddingVector EmaPersonaUpdater::blend(const EmbeddingVector& persona,
                                         const EmbeddingVector& segment, double rate) {
  if (persona.dimension() != segment.dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "persona and segment dimensions differ");
  }
  const auto p = persona.values();
  const auto s = segment.values();
  std::vector<double> mixed(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) mixed[i] = (1.0 - rate) * p[i] + rate * s[i];
  try {
    return normalize_embedding(mixed);
  } catch (const Error&) {
    // Exactly opposite vectors at rate 0.5 cancel out; keep the old persona.
    return persona;
  }
}

PersonaState EmaPersonaUpdater::update(const PersonaState& persona,
                                       const MemorySegment& segment) const {
  PersonaState next = persona;
  next.vector = persona.vector ? blend(*persona.vector, segment.embedding, persona.ema_rate)
                               : segment.embedding;
  next.updated_at = segment.created_at;

  auto profile = tokenize(persona.profile_text);
  const std::unordered_set<std::string> known(profile.begin(), profile.end());
  std::unordered_map<std::string, std::size_t> tf;
  std::vector<std::string> order;
  for (auto& token : tokenize(segment.content())) {
    if (known.contains(token)) continue;
    if (tf[token]++ == 0) order.push_back(token);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](const std::string& a, const std::string& b) { return tf[a] > tf[b]; });
  if (order.size() > kNovelTokensPerUpdate) order.resize(kNovelTokensPerUpdate);
  profile.insert(profile.end(), order.begin(), order.end());
  if (profile.size() > kMaxProfileTokens) {
    profile.erase(profile.begin(), profile.end() - kMaxProfileTokens);
  }
  std::string text;
  for (const auto& token : profile) {
    if (!text.empty()) text += ' ';
    text += token;
  }
  // Keep a hand-written profile as is when the segment adds nothing new.
  next.profile_text = order.empty() ? persona.profile_text : std::move(text);
  return next;
}

Ports Ports::reference(const EngineConfig& cfg) {
  Ports ports;
  ports.embedder = std::make_shared<HashingEmbedder>(static_cast<std::size_t>(cfg.embed_dim));
  ports.importance = std::make_shared<ReferenceImportanceEvaluator>();
  ports.compressor = std::make_shared<ReferenceCompressor>();
  ports.judge =
      std::make_shared<HeuristicSufficiencyJudge>(cfg.reflect_threshold, cfg.reflect_min_hits);
  ports.persona = std::make_shared<EmaPersonaUpdater>();
  return ports;
}

RubricLabel rubric_label(int score) {
  score = std::clamp(score, 1, 10);
  for (const auto& band : kImportanceRubric) {
    if (score >= band.min_score && score <= band.max_score) return band.label;
  }
  return RubricLabel::kTransient;
}

std::string_view to_string(RubricLabel label) {
  switch (label) {
    case RubricLabel::kPivotal: return "Pivotal";
    case RubricLabel::kHighUtility: return "HighUtility";
    case RubricLabel::kInformative: return "Informative";
    case RubricLabel::kTransient: return "Transient";
  }
  return "Transient";
}

std::string_view to_string(VerdictKind kind) {
  return kind == VerdictKind::kSufficient ? "sufficient" : "needs_deeper_search";
}

std::string_view to_string(VerdictSource source) {
  return source == VerdictSource::kHeuristic ? "heuristic" : "remote";
}

}  // namespace hmo
