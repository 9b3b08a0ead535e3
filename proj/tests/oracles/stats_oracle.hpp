#pragma once

// Mann-Whitney U by counting pairs, and its exact two-sided p-value by
// enumerating every way of choosing which pooled values belong to sample a.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double u_by_pairs(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0;
  for (double x : a) {
    for (double y : b) {
      if (x > y) u += 1.0;
      else if (x == y) u += 0.5;
    }
  }
  return u;
}

inline double exact_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = pooled.size(), na = a.size();
  const double mean_u = static_cast<double>(a.size() * b.size()) / 2.0;
  const double observed = std::fabs(u_by_pairs(a, b) - mean_u);
  long total = 0, extreme = 0;
  std::vector<double> pick_a, pick_b;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (pick_a.size() > na || pick_b.size() > n - na) return;
    if (i == n) {
      ++total;
      if (std::fabs(u_by_pairs(pick_a, pick_b) - mean_u) >= observed - 1e-12) ++extreme;
      return;
    }
    pick_a.push_back(pooled[i]);
    rec(i + 1);
    pick_a.pop_back();
    pick_b.push_back(pooled[i]);
    rec(i + 1);
    pick_b.pop_back();
  };
  rec(0);
  return static_cast<double>(extreme) / static_cast<double>(total);
}

inline double cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double ma = mean(a), mb = mean(b);
  double ssa = 0, ssb = 0;
  for (double x : a) ssa += (x - ma) * (x - ma);
  for (double x : b) ssb += (x - mb) * (x - mb);
  const double pooled = std::sqrt((ssa + ssb) / static_cast<double>(a.size() + b.size() - 2));
  return (ma - mb) / pooled;
}

}  // namespace oracle
