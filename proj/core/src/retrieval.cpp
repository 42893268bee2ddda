#include "hmo/retrieval.hpp"

#include <algorithm>
#include <unordered_map>

#include "hmo/error.hpp"

namespace hmo {

std::string_view to_string(RetrievalMode mode) {
  switch (mode) {
    case RetrievalMode::kTiered: return "tiered";
    case RetrievalMode::kNoTier1: return "no_tier1";
    case RetrievalMode::kGlobal: return "global";
  }
  return "tiered";
}

RetrievalMode retrieval_mode_from_string(std::string_view text) {
  if (text == "tiered") return RetrievalMode::kTiered;
  if (text == "no_tier1") return RetrievalMode::kNoTier1;
  if (text == "global") return RetrievalMode::kGlobal;
  throw Error(ErrorCode::kInvalidArgument, "unknown retrieval mode '" + std::string(text) + "'");
}

bool hit_precedes(const RetrievalHit& a, const RetrievalHit& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return b.record_id < a.record_id;
}

namespace {

void renumber(std::vector<RetrievalHit>& hits) {
  for (std::size_t r = 0; r < hits.size(); ++r) hits[r].rank = static_cast<int>(r + 1);
}

void keep_top(std::vector<RetrievalHit>& hits, std::size_t k) {
  const std::size_t n = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(),
                    hit_precedes);
  hits.resize(n);
  renumber(hits);
}

class Scanner {
 public:
  Scanner(const TierStore& store, const EmbeddingVector& query, RetrievalReport& report)
      : store_(store), query_(query), report_(report) {}

  std::vector<RetrievalHit> scan(const std::vector<std::size_t>& indices, std::size_t k) {
    std::vector<RetrievalHit> hits;
    hits.reserve(indices.size());
    for (std::size_t i : indices) {
      const auto& segment = store_.segment(i);
      hits.push_back({segment.id, cosine_sim(query_, segment.embedding), store_.placement(i), 0, i});
    }
    report_.candidates_scanned += indices.size();
    keep_top(hits, k);
    return hits;
  }

 private:
  const TierStore& store_;
  const EmbeddingVector& query_;
  RetrievalReport& report_;
};

ReflectionVerdict consult(const SufficiencyJudge& judge, const TierStore& store,
                          std::string_view query_text, const EmbeddingVector& query,
                          const std::vector<RetrievalHit>& hits) {
  std::vector<JudgedHit> judged;
  judged.reserve(hits.size());
  for (const auto& h : hits) judged.push_back({&store.segment(h.index), h.similarity});
  return judge.judge(SufficiencyQuery{query_text, &query, judged});
}

std::vector<std::size_t> outside(const TierStore& store, std::vector<std::size_t> excluded) {
  std::sort(excluded.begin(), excluded.end());
  std::vector<std::size_t> out;
  out.reserve(store.size() - std::min(store.size(), excluded.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (!std::binary_search(excluded.begin(), excluded.end(), i)) out.push_back(i);
  }
  return out;
}

}  // namespace

std::vector<RetrievalHit> merge_ranked(std::span<const RetrievalHit> a,
                                       std::span<const RetrievalHit> b, std::size_t k) {
  std::vector<RetrievalHit> merged;
  merged.reserve(a.size() + b.size());
  std::unordered_map<RecordId, std::size_t> seen;
  for (auto list : {a, b}) {
    for (const auto& hit : list) {
      const auto [it, fresh] = seen.try_emplace(hit.record_id, merged.size());
      if (fresh) {
        merged.push_back(hit);
      } else if (hit.similarity > merged[it->second].similarity) {
        merged[it->second] = hit;
      }
    }
  }
  keep_top(merged, k);
  return merged;
}

RetrievalReport retrieve(const TierStore& store, std::string_view query_text,
                         const EmbeddingVector& query, std::size_t k, RetrievalMode mode,
                         const SufficiencyJudge& judge) {
  if (query_text.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos) {
    throw Error(ErrorCode::kEmptyQuery, "query is empty");
  }
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  RetrievalReport report;
  if (store.size() == 0) return report;
  Scanner scanner(store, query, report);

  if (mode == RetrievalMode::kGlobal) {
    std::vector<std::size_t> all(store.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    report.tiers_searched = {1, 2, 3};
    report.hits = scanner.scan(all, k);
    return report;
  }

  std::vector<std::size_t> searched;
  if (mode == RetrievalMode::kTiered) {
    searched = store.tier1_indices();
    report.tiers_searched.push_back(1);
    report.hits = scanner.scan(searched, k);
    report.verdicts.push_back(consult(judge, store, query_text, query, report.hits));
    if (report.verdicts.back().sufficient()) return report;
  }

  const auto tier2 = store.tier2_indices();
  searched.insert(searched.end(), tier2.begin(), tier2.end());
  report.tiers_searched.push_back(2);
  const auto hits2 = scanner.scan(tier2, k);
  report.hits = merge_ranked(report.hits, hits2, k);
  report.verdicts.push_back(consult(judge, store, query_text, query, report.hits));
  if (report.verdicts.back().sufficient()) return report;

  report.tiers_searched.push_back(3);
  const auto hits3 = scanner.scan(outside(store, std::move(searched)), k);
  report.hits = merge_ranked(report.hits, hits3, k);
  return report;
}

}  // namespace hmo
