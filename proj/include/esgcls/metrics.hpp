#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <esgcls/errors.hpp>

namespace esgcls {

struct ConfusionMatrix {
  std::vector<std::string> class_names;
  std::vector<std::vector<long long>> counts;  // rows = gold, cols = predicted

  long long total() const {
    long long t = 0;
    for (const auto& row : counts)
      for (long long c : row) t += c;
    return t;
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << "gold\\predicted";
    for (const auto& name : class_names) out << "," << name;
    out << "\n";
    for (std::size_t r = 0; r < counts.size(); ++r) {
      out << class_names[r];
      for (long long c : counts[r]) out << "," << c;
      out << "\n";
    }
    return out.str();
  }
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long long support = 0;
};

struct MetricsReport {
  std::vector<std::string> class_names;
  std::vector<ClassMetrics> per_class;
  double weighted_f1 = 0.0;
  double micro_f1 = 0.0;  // equals accuracy for single-label classification
  double macro_f1 = 0.0;  // mean over classes with nonzero support
  ConfusionMatrix confusion;
  long long total = 0;
};

/// Per-class precision/recall/F1 and the weighted / micro / macro aggregates.
/// Zero denominators yield 0. The weighted mean uses supports as weights; the
/// macro mean averages classes that actually occur in the gold labels.
inline MetricsReport score(const std::vector<int>& gold, const std::vector<int>& predicted,
                           const std::vector<std::string>& class_names) {
  if (gold.size() != predicted.size())
    throw DataError("gold and predicted label vectors differ in length");
  if (gold.empty()) throw DataError("cannot score empty label vectors");
  const int k = static_cast<int>(class_names.size());

  MetricsReport rep;
  rep.class_names = class_names;
  rep.confusion.class_names = class_names;
  rep.confusion.counts.assign(static_cast<std::size_t>(k),
                              std::vector<long long>(static_cast<std::size_t>(k), 0));
  rep.total = static_cast<long long>(gold.size());

  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || gold[i] >= k || predicted[i] < 0 || predicted[i] >= k)
      throw DataError("label outside the class set at position " + std::to_string(i));
    rep.confusion.counts[static_cast<std::size_t>(gold[i])]
                        [static_cast<std::size_t>(predicted[i])] += 1;
  }

  rep.per_class.resize(static_cast<std::size_t>(k));
  long long correct = 0;
  int supported_classes = 0;
  double macro_sum = 0.0;
  for (int c = 0; c < k; ++c) {
    long long tp = rep.confusion.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
    long long fp = 0, fn = 0;
    for (int o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += rep.confusion.counts[static_cast<std::size_t>(o)][static_cast<std::size_t>(c)];
      fn += rep.confusion.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(o)];
    }
    auto& m = rep.per_class[static_cast<std::size_t>(c)];
    m.support = tp + fn;
    m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    correct += tp;
    rep.weighted_f1 += static_cast<double>(m.support) / static_cast<double>(rep.total) * m.f1;
    if (m.support > 0) {
      ++supported_classes;
      macro_sum += m.f1;
    }
  }
  rep.micro_f1 = static_cast<double>(correct) / static_cast<double>(rep.total);
  rep.macro_f1 = supported_classes > 0 ? macro_sum / supported_classes : 0.0;
  return rep;
}

inline nlohmann::json to_json(const MetricsReport& rep) {
  nlohmann::json j;
  j["total"] = rep.total;
  j["weighted_f1"] = rep.weighted_f1;
  j["micro_f1"] = rep.micro_f1;
  j["macro_f1"] = rep.macro_f1;
  auto classes = nlohmann::json::array();
  for (std::size_t c = 0; c < rep.per_class.size(); ++c) {
    const auto& m = rep.per_class[c];
    classes.push_back({{"class", rep.class_names[c]},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"support", m.support}});
  }
  j["per_class"] = classes;
  auto confusion = nlohmann::json::array();
  for (const auto& row : rep.confusion.counts) confusion.push_back(row);
  j["confusion"] = confusion;
  j["confusion_classes"] = rep.class_names;
  return j;
}

}  // namespace esgcls
