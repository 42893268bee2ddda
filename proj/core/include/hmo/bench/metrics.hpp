#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace hmo::bench {

/// 1 when every evidence id is among the first k hits, else 0. Empty evidence
/// counts as retrieved. Throws kInvalidArgument for k == 0.
int recall_at_k(std::span<const std::string> evidence, std::span<const std::string> hits,
                std::size_t k);

/// NDCG over the first k hits with binary gains; 1 for empty evidence.
/// Throws kInvalidArgument for k == 0.
double ndcg_at_k(std::span<const std::string> evidence, std::span<const std::string> hits,
                 std::size_t k);

}  // namespace hmo::bench
