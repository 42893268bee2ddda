#pragma once

// Exhaustive cosine ranking written without the engine's code: its own
// tokenizer, hash, normalization and float round trip. Ties go to the larger
// ordinal, which is the later (larger) record id.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

namespace hmo::testing {

class BruteForce {
 public:
  explicit BruteForce(std::size_t dim) : dim_(dim) {}

  void add_turn(std::string_view q, std::string_view a) {
    std::string text;
    if (q.empty()) {
      text = a;
    } else if (a.empty()) {
      text = q;
    } else {
      text = std::string(q) + "\n" + std::string(a);
    }
    std::vector<double> v = embed(text);
    for (double& x : v) {
      float f = static_cast<float>(x);
      x = static_cast<double>(f);
    }
    records_.push_back(unit(std::move(v)));
  }

  std::size_t size() const { return records_.size(); }

  struct Ranked {
    std::size_t ordinal;
    double similarity;
  };

  std::vector<Ranked> top(std::string_view query, std::size_t k) const {
    const std::vector<double> q = embed(query);
    std::vector<Ranked> all;
    all.reserve(records_.size());
    for (std::size_t o = 0; o < records_.size(); ++o) {
      double dot = 0.0;
      for (std::size_t i = 0; i < dim_; ++i) dot += q[i] * records_[o][i];
      all.push_back({o, std::clamp(dot, -1.0, 1.0)});
    }
    std::sort(all.begin(), all.end(), [](const Ranked& x, const Ranked& y) {
      if (x.similarity != y.similarity) return x.similarity > y.similarity;
      return x.ordinal > y.ordinal;
    });
    all.resize(std::min(k, all.size()));
    return all;
  }

 private:
  static std::uint64_t fnv(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }

  std::vector<double> embed(std::string_view text) const {
    std::vector<double> tf(dim_, 0.0);
    std::string token;
    auto flush = [&] {
      if (!token.empty()) tf[fnv(token) % dim_] += 1.0;
      token.clear();
    };
    for (unsigned char c : text) {
      const bool word = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
                        (c >= 'A' && c <= 'Z') || c >= 0x80;
      if (!word) {
        flush();
      } else {
        token.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : static_cast<char>(c));
      }
    }
    flush();
    return unit(std::move(tf));
  }

  static std::vector<double> unit(std::vector<double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    const double n = std::sqrt(s);
    if (std::abs(n - 1.0) > 1e-12) {
      for (double& x : v) x /= n;
    }
    return v;
  }

  std::size_t dim_;
  std::vector<std::vector<double>> records_;
};

}  // namespace hmo::testing
