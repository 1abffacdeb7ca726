#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include <esgcls/classifier.hpp>
#include <esgcls/errors.hpp>
#include <esgcls/sparse.hpp>

namespace esgcls {

/// One-vs-rest linear SVM. Each class hyperplane minimizes the averaged hinge
/// loss plus 1/(2C) * ||w||^2 by deterministic full-batch subgradient descent
/// with a 1/sqrt(t) step schedule; the returned weights are the average of the
/// last half of the iterates. Confidences are the softmax of the decision
/// margins (a calibration approximation, not Platt scaling).
class SvmModel : public Classifier {
 public:
  std::vector<std::string> classes;
  int dim = 0;
  std::vector<std::vector<double>> weights;  // class x feature
  std::vector<double> bias;
  double C = 1.0;

  std::vector<double> decision_margins(const SparseVector& x) const {
    std::vector<double> m(classes.size(), 0.0);
    for (std::size_t c = 0; c < classes.size(); ++c)
      m[c] = dot(weights[c], x) + bias[c];
    return m;
  }

  std::vector<double> predict_scores(const SparseVector& x) const override {
    return softmax(decision_margins(x));
  }

  const std::vector<std::string>& class_names() const override { return classes; }

  nlohmann::json to_json() const override {
    return {{"kind", "svm"}, {"classes", classes}, {"dim", dim},
            {"C", C},        {"bias", bias},       {"weights", weights}};
  }

  static std::unique_ptr<SvmModel> from_json(const nlohmann::json& j) {
    auto m = std::make_unique<SvmModel>();
    m->classes = j.at("classes").get<std::vector<std::string>>();
    m->dim = j.at("dim").get<int>();
    m->C = j.at("C").get<double>();
    m->bias = j.at("bias").get<std::vector<double>>();
    m->weights = j.at("weights").get<std::vector<std::vector<double>>>();
    return m;
  }
};

struct SvmTrainOptions {
  int iterations = 2000;
  double step0 = 1.0;
};

inline std::unique_ptr<SvmModel> train_svm(const std::vector<SparseVector>& X,
                                           const std::vector<int>& y,
                                           const std::vector<std::string>& class_names,
                                           double C, std::uint64_t seed = 0,
                                           bool class_weighted = false,
                                           const SvmTrainOptions& opts = {}) {
  (void)seed;
  if (!(C > 0.0)) throw TrainError("penalty C must be positive");
  const int k = static_cast<int>(class_names.size());
  detail::validate_training_input(X, y, k, true);

  auto m = std::make_unique<SvmModel>();
  m->classes = class_names;
  m->C = C;
  m->dim = detail::feature_dim(X);
  m->weights.assign(static_cast<std::size_t>(k),
                    std::vector<double>(static_cast<std::size_t>(m->dim), 0.0));
  m->bias.assign(static_cast<std::size_t>(k), 0.0);

  const auto sw = detail::sample_weights(y, k, class_weighted);
  const double n = static_cast<double>(X.size());
  const int avg_from = opts.iterations / 2;

  std::vector<double> w(static_cast<std::size_t>(m->dim), 0.0);
  std::vector<double> gw(static_cast<std::size_t>(m->dim), 0.0);
  for (int c = 0; c < k; ++c) {
    std::fill(w.begin(), w.end(), 0.0);
    double b = 0.0;
    auto& w_avg = m->weights[static_cast<std::size_t>(c)];
    double b_avg = 0.0;
    int averaged = 0;

    for (int t = 1; t <= opts.iterations; ++t) {
      for (std::size_t f = 0; f < w.size(); ++f) gw[f] = w[f] / C;
      double gb = 0.0;
      for (std::size_t i = 0; i < X.size(); ++i) {
        const double sign = y[i] == c ? 1.0 : -1.0;
        const double margin = sign * (dot(w, X[i]) + b);
        if (margin < 1.0) {
          const double coeff = -sign * sw[i] / n;
          for (const auto& [id, v] : X[i].entries) gw[static_cast<std::size_t>(id)] += coeff * v;
          gb += coeff;
        }
      }
      const double step = opts.step0 / std::sqrt(static_cast<double>(t));
      for (std::size_t f = 0; f < w.size(); ++f) w[f] -= step * gw[f];
      b -= step * gb;
      if (t > avg_from) {
        for (std::size_t f = 0; f < w.size(); ++f) w_avg[f] += w[f];
        b_avg += b;
        ++averaged;
      }
    }
    for (std::size_t f = 0; f < w_avg.size(); ++f) w_avg[f] /= averaged;
    m->bias[static_cast<std::size_t>(c)] = b_avg / averaged;
  }
  return m;
}

}  // namespace esgcls
