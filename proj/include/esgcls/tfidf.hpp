#pragma once

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include <json.hpp>

#include <esgcls/errors.hpp>
#include <esgcls/sparse.hpp>
#include <esgcls/tokenizer.hpp>

namespace esgcls {

/// TF-IDF statistics over subword tokens with a maximum document-frequency
/// filter: terms present in more than max_df of the fitted documents are
/// dropped from the feature space.
struct TfIdfModel {
  long long n_docs = 0;
  std::map<int, long long> doc_freq;  // token -> number of documents containing it
  double max_df = 0.7;

  bool active(int token) const {
    auto it = doc_freq.find(token);
    if (it == doc_freq.end()) return false;
    return static_cast<double>(it->second) / static_cast<double>(n_docs) <= max_df;
  }

  // Smoothed inverse document frequency; never divides by zero.
  double idf(int token) const {
    auto it = doc_freq.find(token);
    const long long df = it == doc_freq.end() ? 0 : it->second;
    return std::log(static_cast<double>(1 + n_docs) / static_cast<double>(1 + df)) + 1.0;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["n_docs"] = n_docs;
    j["max_df"] = max_df;
    auto df = nlohmann::json::object();
    for (const auto& [token, n] : doc_freq) df[std::to_string(token)] = n;
    j["doc_freq"] = df;
    return j;
  }

  static TfIdfModel from_json(const nlohmann::json& j) {
    TfIdfModel m;
    m.n_docs = j.at("n_docs").get<long long>();
    m.max_df = j.at("max_df").get<double>();
    for (auto it = j.at("doc_freq").begin(); it != j.at("doc_freq").end(); ++it)
      m.doc_freq[std::stoi(it.key())] = it.value().get<long long>();
    return m;
  }
};

inline TfIdfModel fit_tfidf(const std::vector<TokenSequence>& docs, double max_df = 0.7) {
  if (docs.empty()) throw DataError("tf-idf fit requires at least one document");
  if (!(max_df > 0.0 && max_df <= 1.0)) throw DataError("max_df must be in (0, 1]");
  TfIdfModel m;
  m.max_df = max_df;
  m.n_docs = static_cast<long long>(docs.size());
  for (const auto& seq : docs) {
    std::set<int> present(seq.begin(), seq.end());
    for (int t : present) m.doc_freq[t] += 1;
  }
  return m;
}

/// tf * idf over the active terms, L2-normalized. Inactive and unseen tokens
/// contribute nothing; a document of only inactive tokens maps to the empty
/// (zero) vector.
inline SparseVector transform(const TfIdfModel& model, const TokenSequence& seq) {
  std::map<int, long long> tf;
  for (int t : seq) tf[t] += 1;
  SparseVector out;
  for (const auto& [token, count] : tf) {
    if (!model.active(token)) continue;
    out.entries.push_back({token, static_cast<double>(count) * model.idf(token)});
  }
  double norm = out.l2_norm();
  if (norm > 0.0) {
    for (auto& [token, w] : out.entries) w /= norm;
  }
  return out;
}

inline std::vector<SparseVector> transform_all(const TfIdfModel& model,
                                               const std::vector<TokenSequence>& docs) {
  std::vector<SparseVector> out;
  out.reserve(docs.size());
  for (const auto& seq : docs) out.push_back(transform(model, seq));
  return out;
}

}  // namespace esgcls
