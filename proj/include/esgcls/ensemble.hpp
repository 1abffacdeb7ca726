#pragma once

#include <string>
#include <vector>

#include <esgcls/classifier.hpp>
#include <esgcls/errors.hpp>
#include <esgcls/pipeline.hpp>

namespace esgcls {

struct EnsemblePrediction {
  int label = 0;
  std::vector<double> summed;  // unnormalized element-wise sum
};

/// Score-sum combination: element-wise sum of the member score vectors, final
/// label = argmax with lowest-index tie-break. Members may come from entirely
/// different feature pipelines; only their class score vectors meet here.
inline EnsemblePrediction ensemble_predict(const std::vector<std::vector<double>>& member_scores) {
  if (member_scores.empty()) throw DataError("ensemble needs at least one member");
  const std::size_t k = member_scores.front().size();
  if (k == 0) throw DataError("ensemble member produced an empty score vector");
  EnsemblePrediction out;
  out.summed.assign(k, 0.0);
  for (const auto& scores : member_scores) {
    if (scores.size() != k)
      throw DataError("ensemble member score vectors differ in length");
    for (std::size_t c = 0; c < k; ++c) out.summed[c] += scores[c];
  }
  out.label = argmax_lowest(out.summed);
  return out;
}

/// Scores one document with every member and sums.
inline EnsemblePrediction ensemble_score_document(
    const std::vector<const TextScorer*>& members, const Document& doc) {
  if (members.empty()) throw DataError("ensemble needs at least one member");
  for (const auto* m : members) {
    if (m->class_names() != members.front()->class_names())
      throw DataError("ensemble members expose different class sets");
  }
  std::vector<std::vector<double>> scores;
  scores.reserve(members.size());
  for (const auto* m : members) scores.push_back(m->scores(doc));
  return ensemble_predict(scores);
}

}  // namespace esgcls
