#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <esgcls/corpus.hpp>
#include <esgcls/errors.hpp>
#include <esgcls/pipeline.hpp>
#include <esgcls/rng.hpp>

namespace esgcls {

enum class PseudoMethod { direct, avg_conf };

inline std::string to_string(PseudoMethod m) {
  return m == PseudoMethod::direct ? "direct" : "avg_conf";
}

struct PseudoLabel {
  std::string doc_id;
  int label = 0;
  PseudoMethod method = PseudoMethod::direct;
  double confidence = 0.0;
  std::vector<std::string> teacher_ids;
};

/// One pseudo-label per pool document: the teacher's argmax class with its
/// confidence.
inline std::vector<PseudoLabel> pseudo_direct(const TextScorer& teacher,
                                              const std::string& teacher_id,
                                              const Corpus& pool) {
  std::vector<PseudoLabel> out;
  out.reserve(pool.docs.size());
  for (const auto& d : pool.docs) {
    const auto s = teacher.scores(d);
    const int label = argmax_lowest(s);
    out.push_back({d.id, label, PseudoMethod::direct, s[static_cast<std::size_t>(label)],
                   {teacher_id}});
  }
  return out;
}

/// Averages the two teachers' per-class confidences and labels each document
/// with the maximum averaged score (lowest class index on ties).
inline std::vector<PseudoLabel> pseudo_avg_conf(const TextScorer& teacher_a,
                                                const std::string& id_a,
                                                const TextScorer& teacher_b,
                                                const std::string& id_b,
                                                const Corpus& pool) {
  if (teacher_a.class_names() != teacher_b.class_names())
    throw DataError("avg_conf teachers expose different class sets");
  std::vector<PseudoLabel> out;
  out.reserve(pool.docs.size());
  for (const auto& d : pool.docs) {
    const auto sa = teacher_a.scores(d);
    const auto sb = teacher_b.scores(d);
    std::vector<double> avg(sa.size(), 0.0);
    for (std::size_t c = 0; c < sa.size(); ++c) avg[c] = (sa[c] + sb[c]) / 2.0;
    const int label = argmax_lowest(avg);
    out.push_back({d.id, label, PseudoMethod::avg_conf, avg[static_cast<std::size_t>(label)],
                   {id_a, id_b}});
  }
  return out;
}

/// Fills every minority class up to the majority-class count of the training
/// corpus with pseudo-labeled pool documents, highest confidence first (the
/// seed shuffles equal-confidence candidates). Original documents are never
/// touched; added documents carry the pseudo label and a provenance tag.
inline Corpus balance_augment(const Corpus& train, const std::vector<PseudoLabel>& pseudo,
                              const Corpus& pool, std::uint64_t seed,
                              double min_confidence = 0.0) {
  std::unordered_map<std::string, const Document*> pool_by_id;
  for (const auto& d : pool.docs) pool_by_id[d.id] = &d;
  std::unordered_set<std::string> train_ids;
  for (const auto& d : train.docs) train_ids.insert(d.id);

  const int k = static_cast<int>(train.class_names.size());
  std::vector<long long> counts(static_cast<std::size_t>(k), 0);
  for (const auto& d : train.docs) {
    if (auto label = train.label_of(d)) counts[static_cast<std::size_t>(*label)] += 1;
  }
  const long long majority = *std::max_element(counts.begin(), counts.end());

  std::vector<std::vector<const PseudoLabel*>> by_class(static_cast<std::size_t>(k));
  for (const auto& p : pseudo) {
    if (!pool_by_id.count(p.doc_id))
      throw DataError("pseudo label references unknown pool document '" + p.doc_id + "'");
    if (p.label < 0 || p.label >= k)
      throw DataError("pseudo label class out of range for '" + p.doc_id + "'");
    if (p.confidence < min_confidence) continue;
    by_class[static_cast<std::size_t>(p.label)].push_back(&p);
  }

  Corpus out = train;
  for (int c = 0; c < k; ++c) {
    long long need = majority - counts[static_cast<std::size_t>(c)];
    if (need <= 0) continue;
    auto candidates = by_class[static_cast<std::size_t>(c)];
    // Shuffle first so that the stable sort leaves equal confidences in
    // seeded order.
    Rng rng(derive_seed(seed, "augment", static_cast<std::uint64_t>(c)));
    rng.shuffle(candidates);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const PseudoLabel* a, const PseudoLabel* b) {
                       return a->confidence > b->confidence;
                     });
    for (const auto* p : candidates) {
      if (need <= 0) break;
      if (train_ids.count(p->doc_id))
        throw DataError("pool document '" + p->doc_id + "' collides with a training id");
      Document d = *pool_by_id.at(p->doc_id);
      d.set_label(train.task, p->label);
      d.provenance = "pseudo:" + to_string(p->method);
      out.docs.push_back(std::move(d));
      --need;
    }
  }
  return out;
}

inline std::string pseudo_labels_to_csv(const std::vector<PseudoLabel>& pseudo,
                                        const std::vector<std::string>& class_names) {
  std::ostringstream out;
  out << "doc_id,label,method,confidence,teachers\n";
  out.precision(17);
  for (const auto& p : pseudo) {
    out << p.doc_id << "," << class_names[static_cast<std::size_t>(p.label)] << ","
        << to_string(p.method) << "," << p.confidence << ",";
    for (std::size_t i = 0; i < p.teacher_ids.size(); ++i) {
      if (i > 0) out << ";";
      out << p.teacher_ids[i];
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace esgcls
