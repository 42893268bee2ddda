#include "hmo/bench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "hmo/error.hpp"

namespace hmo::bench {

namespace {

void require_k(std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
}

}  // namespace

int recall_at_k(std::span<const std::string> evidence, std::span<const std::string> hits,
                std::size_t k) {
  require_k(k);
  const auto top = hits.first(std::min(k, hits.size()));
  for (const auto& e : evidence) {
    if (std::find(top.begin(), top.end(), e) == top.end()) return 0;
  }
  return 1;
}

double ndcg_at_k(std::span<const std::string> evidence, std::span<const std::string> hits,
                 std::size_t k) {
  require_k(k);
  const std::unordered_set<std::string> relevant(evidence.begin(), evidence.end());
  if (relevant.empty()) return 1.0;
  double dcg = 0.0;
  std::unordered_set<std::string> credited;
  for (std::size_t p = 0; p < std::min(k, hits.size()); ++p) {
    // A duplicated hit earns its gain once.
    if (relevant.contains(hits[p]) && credited.insert(hits[p]).second) {
      dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
    }
  }
  double ideal = 0.0;
  for (std::size_t p = 0; p < std::min(relevant.size(), k); ++p) {
    ideal += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  }
  return dcg / ideal;
}

}  // namespace hmo::bench
