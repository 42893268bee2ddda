#include "hmo/bench/workload.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "hmo/error.hpp"

namespace hmo::bench {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kTopicWords = 200;
constexpr int kWordsPerTurn = 5;

// std distributions differ between standard libraries; these do not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::size_t below(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  }

 private:
  std::mt19937_64 engine_;
};

class WordSource {
 public:
  explicit WordSource(Rng& rng) : rng_(rng) {}

  // Unique words never repeat; the rest may.
  std::string word(int syllables, bool unique) {
    static constexpr std::string_view kConsonants = "bdfgklmnprstvz";
    static constexpr std::string_view kVowels = "aeiou";
    for (;;) {
      std::string out;
      for (int i = 0; i < syllables; ++i) {
        out.push_back(kConsonants[rng_.below(kConsonants.size())]);
        out.push_back(kVowels[rng_.below(kVowels.size())]);
      }
      if (!unique || used_.insert(out).second) return out;
    }
  }

 private:
  Rng& rng_;
  std::unordered_set<std::string> used_;
};

class Zipf {
 public:
  Zipf(std::size_t n, double s) : cumulative_(n) {
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      total += 1.0 / std::pow(static_cast<double>(r + 1), s);
      cumulative_[r] = total;
    }
    for (double& c : cumulative_) c /= total;
  }

  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                 cumulative_.size() - 1);
  }

 private:
  std::vector<double> cumulative_;
};

struct TurnFacts {
  std::size_t topic = 0;
  std::string entity;
  std::vector<std::string> words;
};

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kCorpusParseError, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

void WorkloadSpec::validate() const {
  if (sessions < 1 || turns_per_session < 1 || topics < 1 || questions < 0 ||
      turn_interval < 0 || session_interval < 0 || recent_window < 1) {
    throw Error(ErrorCode::kInvalidArgument, "workload counts must be positive");
  }
  if (!(zipf_s >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "zipf exponent must be >= 0");
  if (!(locality >= 0.0 && locality <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "locality must lie in [0, 1]");
  }
}

std::size_t Corpus::turn_count() const {
  return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [](const auto& e) {
    return std::holds_alternative<TurnEvent>(e);
  }));
}

std::size_t Corpus::question_count() const { return events.size() - turn_count(); }

Corpus generate_workload(const WorkloadSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  WordSource words(rng);
  const auto n_topics = static_cast<std::size_t>(spec.topics);

  std::vector<std::vector<std::string>> vocab(n_topics);
  for (auto& topic : vocab) {
    for (int i = 0; i < kTopicWords; ++i) topic.push_back(words.word(3, true));
  }
  const Zipf popularity(n_topics, spec.zipf_s);

  Corpus corpus;
  std::vector<TurnFacts> facts;
  UnixSeconds ts = spec.start_ts;
  for (std::int64_t s = 0; s < spec.sessions; ++s) {
    if (s > 0) ts += spec.session_interval;
    const std::string session = "s" + std::to_string(s);
    for (std::int64_t t = 0; t < spec.turns_per_session; ++t) {
      if (t > 0) ts += spec.turn_interval;
      TurnFacts f;
      f.topic = popularity.draw(rng);
      f.entity = words.word(3, false) + std::to_string(facts.size());
      std::vector<std::string> pool = vocab[f.topic];
      for (int i = 0; i < kWordsPerTurn; ++i) {
        const std::size_t j = i + rng.below(pool.size() - i);
        std::swap(pool[i], pool[j]);
        f.words.push_back(pool[i]);
      }
      const std::string value = words.word(2, false) + std::to_string(rng.below(1000));

      TurnEvent turn;
      turn.session = session;
      turn.ts = ts;
      if (rng.below(2) == 0) {
        turn.q = "Can you note " + f.entity + " for " + f.words[0] + " " + f.words[1] + " " +
                 f.words[2] + "?";
      } else {
        turn.q = "Please keep " + f.entity + " for " + f.words[0] + " " + f.words[1] + " " +
                 f.words[2] + ".";
      }
      turn.a = "Noted: " + f.entity + " is " + value + " with " + f.words[3] + " " + f.words[4] + ".";
      corpus.events.emplace_back(std::move(turn));
      facts.push_back(std::move(f));
    }
  }

  std::vector<std::int64_t> recent;
  for (std::size_t o = facts.size(); o-- > 0 && static_cast<std::int64_t>(recent.size()) < spec.recent_window;) {
    if (facts[o].topic == 0) recent.push_back(static_cast<std::int64_t>(o));
  }
  for (std::int64_t i = 0; i < spec.questions; ++i) {
    ts += spec.turn_interval;
    std::int64_t target = 0;
    if (!recent.empty() && rng.uniform() < spec.locality) {
      target = recent[rng.below(recent.size())];
    } else {
      target = static_cast<std::int64_t>(rng.below(facts.size()));
    }
    const auto& f = facts[static_cast<std::size_t>(target)];
    QuestionEvent question;
    static constexpr std::array<std::string_view, 6> kOpeners = {
        "What about", "Remind me of", "Any news on", "Recall", "Tell me again about", "Which was"};
    question.q = std::string(kOpeners[rng.below(kOpeners.size())]) + " " + f.entity + " " +
                 f.words[0] + " " + f.words[1] + " " + f.words[2] + " " + f.words[3] + " " + f.words[4] + "?";
    question.evidence.emplace_back(target);
    question.ts = ts;
    corpus.events.emplace_back(std::move(question));
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& event : corpus.events) {
    ordered_json j;
    if (const auto* turn = std::get_if<TurnEvent>(&event)) {
      j = {{"type", "turn"}, {"session", turn->session}, {"q", turn->q}, {"a", turn->a}, {"ts", turn->ts}};
    } else {
      const auto& question = std::get<QuestionEvent>(event);
      ordered_json evidence = ordered_json::array();
      for (const auto& ref : question.evidence) {
        std::visit([&](const auto& v) { evidence.push_back(v); }, ref);
      }
      j = {{"type", "question"}, {"q", question.q}, {"evidence", evidence}, {"ts", question.ts}};
      if (question.k) j["k"] = *question.k;
    }
    out << j.dump() << '\n';
  }
}

std::string corpus_to_string(const Corpus& corpus) {
  std::ostringstream out;
  write_corpus(corpus, out);
  return out.str();
}

Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  std::int64_t turns = 0;
  std::optional<UnixSeconds> last_ts;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      parse_error(line_no, std::string("malformed JSON: ") + e.what());
    }
    try {
      if (!j.is_object()) parse_error(line_no, "event is not an object");
      const auto type = j.at("type").get<std::string>();
      const auto ts = j.at("ts").get<UnixSeconds>();
      if (last_ts && ts < *last_ts) parse_error(line_no, "timestamp decreases");
      last_ts = ts;
      if (type == "turn") {
        TurnEvent turn{j.at("session").get<std::string>(), j.value("q", std::string()),
                       j.value("a", std::string()), ts};
        corpus.events.emplace_back(std::move(turn));
        ++turns;
      } else if (type == "question") {
        QuestionEvent question;
        question.q = j.at("q").get<std::string>();
        question.ts = ts;
        for (const auto& ref : j.at("evidence")) {
          if (ref.is_number_integer()) {
            const auto ordinal = ref.get<std::int64_t>();
            if (ordinal < 0 || ordinal >= turns) {
              parse_error(line_no, "evidence " + std::to_string(ordinal) + " is not an earlier turn");
            }
            question.evidence.emplace_back(ordinal);
          } else if (ref.is_string()) {
            question.evidence.emplace_back(ref.get<std::string>());
          } else {
            parse_error(line_no, "evidence must be a turn ordinal or a record id");
          }
        }
        if (j.contains("k")) {
          const auto k = j.at("k").get<std::int64_t>();
          if (k < 1) parse_error(line_no, "k must be at least 1");
          question.k = k;
        }
        corpus.events.emplace_back(std::move(question));
      } else {
        parse_error(line_no, "unknown event type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      parse_error(line_no, e.what());
    }
  }
  return corpus;
}

Corpus parse_corpus_string(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in);
}

}  // namespace hmo::bench
