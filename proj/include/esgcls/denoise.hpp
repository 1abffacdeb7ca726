#pragma once

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <esgcls/corpus.hpp>
#include <esgcls/cv.hpp>
#include <esgcls/errors.hpp>
#include <esgcls/pipeline.hpp>

namespace esgcls {

/// Out-of-fold prediction record: quality is the confidence of the predicted
/// class, signed positive on agreement with the gold label and negative on
/// disagreement.
struct QualityRecord {
  std::string doc_id;
  int gold = 0;
  int predicted = 0;
  double confidence = 0.0;
  double quality = 0.0;
};

inline double quality_score(int gold, int predicted, double confidence) {
  if (!(confidence >= 0.0 && confidence <= 1.0))
    throw DataError("confidence must lie in [0, 1]");
  return gold == predicted ? confidence : -confidence;
}

/// Scores every labeled document out-of-fold: for each fold the base pipeline
/// is trained (with inner tuning) on the other folds and applied to the
/// held-out documents, so no document is scored by a model that saw it.
/// Returns one record per labeled document, in corpus order.
inline std::vector<QualityRecord> score_corpus(const Corpus& corpus, const FoldPlan& plan,
                                               const PipelineConfig& base,
                                               std::uint64_t seed) {
  const auto fold_of = plan.fold_of_corpus(corpus);
  std::vector<QualityRecord> by_position(corpus.docs.size());
  std::vector<char> scored(corpus.docs.size(), 0);

  for (int f = 0; f < plan.k; ++f) {
    std::vector<int> train_idx, val_idx;
    for (int i = 0; i < static_cast<int>(corpus.docs.size()); ++i) {
      if (fold_of[static_cast<std::size_t>(i)] < 0) continue;
      (fold_of[static_cast<std::size_t>(i)] == f ? val_idx : train_idx).push_back(i);
    }
    if (val_idx.empty()) continue;

    TrainedPipeline trained;
    try {
      trained = train_pipeline(corpus, train_idx, base,
                               derive_seed(seed, "fold", static_cast<std::uint64_t>(f)));
    } catch (const TrainError& e) {
      throw TrainError("fold " + std::to_string(f) + ": " + e.what());
    }

    for (int i : val_idx) {
      const auto& d = corpus.docs[static_cast<std::size_t>(i)];
      const auto s = trained.pipeline.scores(d);
      const int pred = argmax_lowest(s);
      const double conf = s[static_cast<std::size_t>(pred)];
      const int gold = *corpus.label_of(d);
      by_position[static_cast<std::size_t>(i)] =
          {d.id, gold, pred, conf, quality_score(gold, pred, conf)};
      scored[static_cast<std::size_t>(i)] = 1;
    }
  }

  std::vector<QualityRecord> records;
  records.reserve(corpus.docs.size());
  for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
    if (scored[i]) records.push_back(std::move(by_position[i]));
  }
  return records;
}

/// Drops the floor(n * x / 100) lowest-quality documents (ties broken by
/// doc id); per_language prunes that share within each language instead.
inline Corpus prune(const Corpus& corpus, const std::vector<QualityRecord>& records,
                    double x_percent, bool per_language = false) {
  if (!(x_percent >= 0.0 && x_percent < 100.0))
    throw DataError("prune percentage must lie in [0, 100)");

  std::unordered_map<std::string, const QualityRecord*> by_id;
  for (const auto& r : records) by_id[r.doc_id] = &r;
  for (const auto& d : corpus.docs) {
    if (corpus.label_of(d) && !by_id.count(d.id))
      throw DataError("quality records do not cover document '" + d.id + "'");
  }

  struct Item {
    double quality;
    std::string id;
  };
  auto pick_drops = [&](const std::vector<Item>& items, std::unordered_set<std::string>& out) {
    auto sorted = items;
    std::sort(sorted.begin(), sorted.end(), [](const Item& a, const Item& b) {
      if (a.quality != b.quality) return a.quality < b.quality;
      return a.id < b.id;
    });
    const auto n_drop = static_cast<std::size_t>(
        static_cast<double>(sorted.size()) * x_percent / 100.0);
    for (std::size_t i = 0; i < n_drop; ++i) out.insert(sorted[i].id);
  };

  std::unordered_set<std::string> drops;
  if (per_language) {
    std::map<Language, std::vector<Item>> groups;
    std::unordered_map<std::string, Language> lang_of;
    for (const auto& d : corpus.docs) lang_of[d.id] = d.language;
    for (const auto& r : records)
      groups[lang_of.at(r.doc_id)].push_back({r.quality, r.doc_id});
    for (const auto& [lang, items] : groups) pick_drops(items, drops);
  } else {
    std::vector<Item> items;
    items.reserve(records.size());
    for (const auto& r : records) items.push_back({r.quality, r.doc_id});
    pick_drops(items, drops);
  }

  Corpus out(corpus.task);
  for (const auto& d : corpus.docs) {
    if (!drops.count(d.id)) out.docs.push_back(d);
  }
  return out;
}

inline std::string quality_records_to_csv(const std::vector<QualityRecord>& records,
                                          const std::vector<std::string>& class_names) {
  std::ostringstream out;
  out << "doc_id,gold,predicted,confidence,quality\n";
  out.precision(17);
  for (const auto& r : records) {
    out << r.doc_id << "," << class_names[static_cast<std::size_t>(r.gold)] << ","
        << class_names[static_cast<std::size_t>(r.predicted)] << "," << r.confidence << ","
        << r.quality << "\n";
  }
  return out.str();
}

}  // namespace esgcls
