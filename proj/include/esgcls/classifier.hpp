#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <esgcls/errors.hpp>
#include <esgcls/sparse.hpp>

namespace esgcls {

inline int argmax_lowest(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) best = i;
  }
  return best;
}

/// Numerically stable softmax.
inline std::vector<double> softmax(std::vector<double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return z;
}

/// Anything that maps a feature vector to a per-class confidence distribution
/// (entries >= 0, summing to 1; predicted label = argmax, lowest index wins).
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::vector<double> predict_scores(const SparseVector& x) const = 0;
  virtual const std::vector<std::string>& class_names() const = 0;
  virtual nlohmann::json to_json() const = 0;

  int predict_label(const SparseVector& x) const { return argmax_lowest(predict_scores(x)); }
};

enum class ModelKind { logistic, svm, random_forest, prior };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::logistic: return "logistic";
    case ModelKind::svm: return "svm";
    case ModelKind::random_forest: return "rf";
    case ModelKind::prior: return "prior";
  }
  return "?";
}

inline std::optional<ModelKind> parse_model_kind(const std::string& s) {
  if (s == "logistic") return ModelKind::logistic;
  if (s == "svm") return ModelKind::svm;
  if (s == "rf" || s == "random_forest") return ModelKind::random_forest;
  if (s == "prior") return ModelKind::prior;
  return std::nullopt;
}

/// One hyperparameter setting. Fields not relevant to the kind are ignored.
struct TrainConfig {
  ModelKind kind = ModelKind::random_forest;
  double C = 1.0;               // logistic / svm penalty
  int n_trees = 100;            // forest
  int max_depth = 0;            // forest; 0 = unbounded
  int min_samples_split = 2;    // forest
  bool bootstrap = true;        // forest
  bool class_weighted = false;  // inverse-frequency sample weights

  std::string describe() const {
    switch (kind) {
      case ModelKind::logistic:
      case ModelKind::svm:
        return to_string(kind) + "(C=" + format_double(C) +
               (class_weighted ? ",weighted" : "") + ")";
      case ModelKind::random_forest:
        return "rf(trees=" + std::to_string(n_trees) +
               ",depth=" + (max_depth > 0 ? std::to_string(max_depth) : std::string("inf")) +
               ",min_split=" + std::to_string(min_samples_split) +
               (bootstrap ? "" : ",no_bootstrap") + (class_weighted ? ",weighted" : "") + ")";
      case ModelKind::prior:
        return "prior";
    }
    return "?";
  }

  nlohmann::json to_json() const {
    return {{"kind", to_string(kind)},
            {"C", C},
            {"n_trees", n_trees},
            {"max_depth", max_depth},
            {"min_samples_split", min_samples_split},
            {"bootstrap", bootstrap},
            {"class_weighted", class_weighted}};
  }

  static TrainConfig from_json(const nlohmann::json& j) {
    TrainConfig c;
    auto kind = parse_model_kind(j.at("kind").get<std::string>());
    if (!kind) throw DataError("unknown model kind in config");
    c.kind = *kind;
    if (j.contains("C")) c.C = j["C"].get<double>();
    if (j.contains("n_trees")) c.n_trees = j["n_trees"].get<int>();
    if (j.contains("max_depth")) c.max_depth = j["max_depth"].get<int>();
    if (j.contains("min_samples_split")) c.min_samples_split = j["min_samples_split"].get<int>();
    if (j.contains("bootstrap")) c.bootstrap = j["bootstrap"].get<bool>();
    if (j.contains("class_weighted")) c.class_weighted = j["class_weighted"].get<bool>();
    return c;
  }

 private:
  static std::string format_double(double v) {
    std::string s = std::to_string(v);
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }
};

namespace detail {

/// Shared training-input validation. Classifiers other than the constant
/// baseline require at least two classes.
inline void validate_training_input(const std::vector<SparseVector>& X,
                                    const std::vector<int>& y, int n_classes,
                                    bool require_two_classes) {
  if (X.empty() || X.size() != y.size())
    throw TrainError("training requires matching non-empty features and labels");
  std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || y[i] >= n_classes) throw TrainError("label outside the class set");
    counts[static_cast<std::size_t>(y[i])] += 1;
    if (!all_finite(X[i])) throw TrainError("non-finite feature value in training data");
  }
  if (require_two_classes) {
    int present = 0;
    for (int c : counts) present += c > 0 ? 1 : 0;
    if (present < 2) throw TrainError("training data contains a single class");
  }
}

inline int feature_dim(const std::vector<SparseVector>& X) {
  int d = 0;
  for (const auto& x : X) d = std::max(d, x.max_id() + 1);
  return d;
}

/// Per-sample weights, mean 1. Inverse class frequency when enabled.
inline std::vector<double> sample_weights(const std::vector<int>& y, int n_classes,
                                          bool class_weighted) {
  const auto n = static_cast<double>(y.size());
  std::vector<double> w(y.size(), 1.0);
  if (!class_weighted) return w;
  std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
  for (int label : y) counts[static_cast<std::size_t>(label)] += 1.0;
  int present = 0;
  for (double c : counts) present += c > 0.0 ? 1 : 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    w[i] = n / (static_cast<double>(present) * counts[static_cast<std::size_t>(y[i])]);
  return w;
}

}  // namespace detail

/// Constant baseline: always returns the training class frequencies.
class PriorClassifier : public Classifier {
 public:
  PriorClassifier(std::vector<std::string> class_names, std::vector<double> probs)
      : class_names_(std::move(class_names)), probs_(std::move(probs)) {}

  std::vector<double> predict_scores(const SparseVector&) const override { return probs_; }
  const std::vector<std::string>& class_names() const override { return class_names_; }

  nlohmann::json to_json() const override {
    return {{"kind", "prior"}, {"classes", class_names_}, {"probs", probs_}};
  }

  static std::unique_ptr<PriorClassifier> from_json(const nlohmann::json& j) {
    return std::make_unique<PriorClassifier>(j.at("classes").get<std::vector<std::string>>(),
                                             j.at("probs").get<std::vector<double>>());
  }

 private:
  std::vector<std::string> class_names_;
  std::vector<double> probs_;
};

inline std::unique_ptr<PriorClassifier> train_prior(const std::vector<SparseVector>& X,
                                                    const std::vector<int>& y,
                                                    const std::vector<std::string>& class_names) {
  detail::validate_training_input(X, y, static_cast<int>(class_names.size()), false);
  std::vector<double> probs(class_names.size(), 0.0);
  for (int label : y) probs[static_cast<std::size_t>(label)] += 1.0;
  for (double& p : probs) p /= static_cast<double>(y.size());
  return std::make_unique<PriorClassifier>(class_names, std::move(probs));
}

}  // namespace esgcls
