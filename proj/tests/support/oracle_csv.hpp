#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace hmo::testing {

struct ScoreCase {
  int importance = 0;
  double sim = 0.0;
  std::int64_t recall_count = 0;
  std::int64_t dt = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  double expected = 0.0;
};

// Rows of priority_score_oracle.csv; empty if the file is missing.
inline std::vector<ScoreCase> load_score_cases(const std::string& path) {
  std::vector<ScoreCase> out;
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) continue;
    ScoreCase c;
    c.importance = std::atoi(f[0].c_str());
    c.sim = std::strtod(f[1].c_str(), nullptr);
    c.recall_count = std::strtoll(f[2].c_str(), nullptr, 10);
    c.dt = std::strtoll(f[3].c_str(), nullptr, 10);
    c.alpha = std::strtod(f[4].c_str(), nullptr);
    c.beta = std::strtod(f[5].c_str(), nullptr);
    c.lambda = std::strtod(f[6].c_str(), nullptr);
    c.expected = std::strtod(f[7].c_str(), nullptr);
    out.push_back(c);
  }
  return out;
}

}  // namespace hmo::testing
