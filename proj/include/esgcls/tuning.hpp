#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <esgcls/metrics.hpp>
#include <esgcls/models.hpp>
#include <esgcls/rng.hpp>

namespace esgcls {

/// Seeded stratified split of sample indices into (train, validation) at the
/// given validation fraction. Every class keeps at least one training member.
inline std::pair<std::vector<int>, std::vector<int>> stratified_split(
    const std::vector<int>& y, int n_classes, double val_fraction, std::uint64_t seed) {
  std::vector<int> train, val;
  for (int c = 0; c < n_classes; ++c) {
    std::vector<int> members;
    for (int i = 0; i < static_cast<int>(y.size()); ++i) {
      if (y[static_cast<std::size_t>(i)] == c) members.push_back(i);
    }
    if (members.empty()) continue;
    Rng rng(derive_seed(seed, "inner-split", static_cast<std::uint64_t>(c)));
    rng.shuffle(members);
    auto n_val = static_cast<std::size_t>(static_cast<double>(members.size()) * val_fraction);
    if (n_val >= members.size()) n_val = members.size() - 1;
    for (std::size_t i = 0; i < members.size(); ++i)
      (i < n_val ? val : train).push_back(members[i]);
  }
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {std::move(train), std::move(val)};
}

struct TuneResult {
  int best_index = 0;
  TrainConfig best;
  std::vector<double> inner_f1;          // weighted F1 per grid point (0 when failed)
  std::vector<std::string> failures;     // "<index>: <reason>"
  std::unique_ptr<Classifier> model;     // winner refitted on the full data
};

/// Grid search with an 80/20 stratified inner split: train each setting on the
/// 80% side, select by weighted F1 on the 20% side (ties keep the first grid
/// entry), then refit the winner on everything. Settings that fail to train
/// are recorded and skipped.
inline TuneResult tune(const std::vector<TrainConfig>& grid,
                       const std::vector<SparseVector>& X, const std::vector<int>& y,
                       const std::vector<std::string>& class_names, std::uint64_t seed) {
  if (grid.empty()) throw TrainError("hyperparameter grid is empty");
  const int k = static_cast<int>(class_names.size());

  TuneResult result;
  result.inner_f1.assign(grid.size(), 0.0);

  if (grid.size() == 1) {
    result.best = grid[0];
    result.model = train_model(grid[0], X, y, class_names, derive_seed(seed, "refit"));
    return result;
  }

  auto [train_idx, val_idx] = stratified_split(y, k, 0.2, seed);
  std::vector<SparseVector> Xt, Xv;
  std::vector<int> yt, yv;
  for (int i : train_idx) {
    Xt.push_back(X[static_cast<std::size_t>(i)]);
    yt.push_back(y[static_cast<std::size_t>(i)]);
  }
  for (int i : val_idx) {
    Xv.push_back(X[static_cast<std::size_t>(i)]);
    yv.push_back(y[static_cast<std::size_t>(i)]);
  }

  int best = -1;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    try {
      auto model = train_model(grid[g], Xt, yt, class_names, derive_seed(seed, "grid", g));
      double f1 = 0.0;
      if (!yv.empty()) {
        std::vector<int> pred;
        pred.reserve(yv.size());
        for (const auto& x : Xv) pred.push_back(model->predict_label(x));
        f1 = score(yv, pred, class_names).weighted_f1;
      }
      result.inner_f1[g] = f1;
      if (best < 0 || f1 > result.inner_f1[static_cast<std::size_t>(best)])
        best = static_cast<int>(g);
    } catch (const TrainError& e) {
      result.failures.push_back(std::to_string(g) + ": " + e.what());
    }
  }
  if (best < 0) throw TrainError("all grid points failed to train");

  result.best_index = best;
  result.best = grid[static_cast<std::size_t>(best)];
  result.model = train_model(result.best, X, y, class_names, derive_seed(seed, "refit"));
  return result;
}

}  // namespace esgcls
