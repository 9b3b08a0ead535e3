#pragma once

// Full-sort nearest neighbours. Each vector is scaled to unit length, the
// score is the plain dot product (clamped to [-1, 1]), and the whole corpus
// is sorted by score descending, then id ascending.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

inline std::vector<double> unit(const std::vector<double>& v) {
  double ss = 0;
  for (double x : v) ss += x * x;
  const double n = std::sqrt(ss);
  std::vector<double> out;
  for (double x : v) out.push_back(x / n);
  return out;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ua = unit(a), ub = unit(b);
  double dot = 0;
  for (std::size_t i = 0; i < ua.size(); ++i) dot += ua[i] * ub[i];
  return std::max(-1.0, std::min(1.0, dot));
}

inline std::vector<std::string> top_k(const std::vector<std::pair<std::string, std::vector<double>>>& corpus,
                                      const std::vector<double>& query, std::size_t k) {
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& [id, v] : corpus) scored.emplace_back(cosine(query, v), id);
  std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < k && i < scored.size(); ++i) ids.push_back(scored[i].second);
  return ids;
}

}  // namespace oracle
