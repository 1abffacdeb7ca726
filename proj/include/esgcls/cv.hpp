#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include <esgcls/corpus.hpp>
#include <esgcls/metrics.hpp>
#include <esgcls/pipeline.hpp>

namespace esgcls {

struct FoldReport {
  int fold = 0;
  MetricsReport metrics;
  std::map<std::string, double> per_language_weighted_f1;
  TuneReport tuning;
};

struct CvResult {
  std::vector<FoldReport> folds;
  double mean_weighted_f1 = 0.0;
  double stddev_weighted_f1 = 0.0;  // population standard deviation
};

/// k-fold cross-validation: for each fold, the pipeline (tokenizer, TF-IDF,
/// tuned classifier) is trained from scratch on the other k-1 folds and
/// evaluated on the held-out fold.
inline CvResult cross_validate(const Corpus& corpus, const FoldPlan& plan,
                               const PipelineConfig& cfg, std::uint64_t seed) {
  const auto fold_of = plan.fold_of_corpus(corpus);
  CvResult result;

  for (int f = 0; f < plan.k; ++f) {
    std::vector<int> train_idx, val_idx;
    for (int i = 0; i < static_cast<int>(corpus.docs.size()); ++i) {
      if (fold_of[static_cast<std::size_t>(i)] < 0) continue;
      (fold_of[static_cast<std::size_t>(i)] == f ? val_idx : train_idx).push_back(i);
    }
    if (val_idx.empty())
      throw DataError("fold " + std::to_string(f) + " has no validation documents");

    auto trained = train_pipeline(corpus, train_idx, cfg,
                                  derive_seed(seed, "fold", static_cast<std::uint64_t>(f)));

    std::vector<int> gold, pred;
    std::map<std::string, std::pair<std::vector<int>, std::vector<int>>> by_language;
    gold.reserve(val_idx.size());
    pred.reserve(val_idx.size());
    for (int i : val_idx) {
      const auto& d = corpus.docs[static_cast<std::size_t>(i)];
      const int g = *corpus.label_of(d);
      const int p = trained.pipeline.predict(d);
      gold.push_back(g);
      pred.push_back(p);
      auto& bucket = by_language[to_string(d.language)];
      bucket.first.push_back(g);
      bucket.second.push_back(p);
    }

    FoldReport report;
    report.fold = f;
    report.metrics = score(gold, pred, corpus.class_names);
    for (const auto& [lang, pair] : by_language)
      report.per_language_weighted_f1[lang] =
          score(pair.first, pair.second, corpus.class_names).weighted_f1;
    report.tuning = trained.tuning;
    result.folds.push_back(std::move(report));
  }

  double mean = 0.0;
  for (const auto& r : result.folds) mean += r.metrics.weighted_f1;
  mean /= static_cast<double>(result.folds.size());
  double var = 0.0;
  for (const auto& r : result.folds) {
    const double d = r.metrics.weighted_f1 - mean;
    var += d * d;
  }
  result.mean_weighted_f1 = mean;
  result.stddev_weighted_f1 = std::sqrt(var / static_cast<double>(result.folds.size()));
  return result;
}

/// Index of the fold with the highest weighted F1 (ties keep the lowest index).
inline int select_best_fold(const std::vector<FoldReport>& reports) {
  if (reports.empty()) throw DataError("no fold reports to select from");
  int best = 0;
  for (int i = 1; i < static_cast<int>(reports.size()); ++i) {
    if (reports[static_cast<std::size_t>(i)].metrics.weighted_f1 >
        reports[static_cast<std::size_t>(best)].metrics.weighted_f1)
      best = i;
  }
  return best;
}

inline nlohmann::json to_json(const CvResult& cv) {
  nlohmann::json j;
  j["mean_weighted_f1"] = cv.mean_weighted_f1;
  j["stddev_weighted_f1"] = cv.stddev_weighted_f1;
  auto folds = nlohmann::json::array();
  for (const auto& r : cv.folds) {
    nlohmann::json fj;
    fj["fold"] = r.fold;
    fj["metrics"] = to_json(r.metrics);
    fj["per_language_weighted_f1"] = r.per_language_weighted_f1;
    fj["tuning"] = to_json(r.tuning);
    folds.push_back(std::move(fj));
  }
  j["folds"] = folds;
  return j;
}

}  // namespace esgcls
