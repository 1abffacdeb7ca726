#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace esgcls {

/// Sparse feature vector with strictly increasing ids and finite weights.
struct SparseVector {
  std::vector<std::pair<int, double>> entries;

  bool empty() const { return entries.empty(); }

  double at(int id) const {
    auto it = std::lower_bound(
        entries.begin(), entries.end(), id,
        [](const std::pair<int, double>& e, int key) { return e.first < key; });
    return (it != entries.end() && it->first == id) ? it->second : 0.0;
  }

  double l2_norm() const {
    double s = 0.0;
    for (const auto& [id, w] : entries) s += w * w;
    return std::sqrt(s);
  }

  int max_id() const { return entries.empty() ? -1 : entries.back().first; }
};

/// dense[i] . sparse, ignoring sparse ids outside the dense range.
inline double dot(const std::vector<double>& dense, const SparseVector& x) {
  double s = 0.0;
  const int dim = static_cast<int>(dense.size());
  for (const auto& [id, w] : x.entries) {
    if (id < dim) s += dense[id] * w;
  }
  return s;
}

inline bool all_finite(const SparseVector& x) {
  for (const auto& [id, w] : x.entries) {
    if (!std::isfinite(w)) return false;
  }
  return true;
}

}  // namespace esgcls
