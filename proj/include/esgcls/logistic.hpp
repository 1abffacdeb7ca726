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

/// Multinomial logistic regression trained by deterministic full-batch
/// gradient descent on the per-sample-averaged cross-entropy plus an L2
/// penalty of 1/(2C) * ||W||^2 (bias unpenalized).
class LogisticModel : public Classifier {
 public:
  std::vector<std::string> classes;
  int dim = 0;
  std::vector<std::vector<double>> weights;  // class x feature
  std::vector<double> bias;
  double C = 1.0;

  std::vector<double> predict_scores(const SparseVector& x) const override {
    std::vector<double> logits(classes.size(), 0.0);
    for (std::size_t c = 0; c < classes.size(); ++c)
      logits[c] = dot(weights[c], x) + bias[c];
    return softmax(std::move(logits));
  }

  const std::vector<std::string>& class_names() const override { return classes; }

  nlohmann::json to_json() const override {
    return {{"kind", "logistic"}, {"classes", classes}, {"dim", dim},
            {"C", C},             {"bias", bias},       {"weights", weights}};
  }

  static std::unique_ptr<LogisticModel> from_json(const nlohmann::json& j) {
    auto m = std::make_unique<LogisticModel>();
    m->classes = j.at("classes").get<std::vector<std::string>>();
    m->dim = j.at("dim").get<int>();
    m->C = j.at("C").get<double>();
    m->bias = j.at("bias").get<std::vector<double>>();
    m->weights = j.at("weights").get<std::vector<std::vector<double>>>();
    return m;
  }
};

namespace detail {

struct LogisticProblem {
  const std::vector<SparseVector>& X;
  const std::vector<int>& y;
  const std::vector<double>& sample_weight;  // mean 1
  int n_classes;
  int dim;
  double C;
};

inline std::vector<double> logits_of(const LogisticProblem& p,
                                     const std::vector<std::vector<double>>& W,
                                     const std::vector<double>& b, std::size_t i) {
  std::vector<double> z(static_cast<std::size_t>(p.n_classes), 0.0);
  for (int c = 0; c < p.n_classes; ++c)
    z[static_cast<std::size_t>(c)] = dot(W[static_cast<std::size_t>(c)], p.X[i]) +
                                     b[static_cast<std::size_t>(c)];
  return z;
}

inline double logistic_objective(const LogisticProblem& p,
                                 const std::vector<std::vector<double>>& W,
                                 const std::vector<double>& b) {
  const double n = static_cast<double>(p.X.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < p.X.size(); ++i) {
    auto z = logits_of(p, W, b, i);
    const double zmax = *std::max_element(z.begin(), z.end());
    double lse = 0.0;
    for (double v : z) lse += std::exp(v - zmax);
    lse = zmax + std::log(lse);
    loss += p.sample_weight[i] * (lse - z[static_cast<std::size_t>(p.y[i])]);
  }
  loss /= n;
  double reg = 0.0;
  for (const auto& row : W)
    for (double w : row) reg += w * w;
  return loss + reg / (2.0 * p.C);
}

/// Analytic gradient of logistic_objective; returns the squared norm.
inline double logistic_gradient(const LogisticProblem& p,
                                const std::vector<std::vector<double>>& W,
                                const std::vector<double>& b,
                                std::vector<std::vector<double>>& gW,
                                std::vector<double>& gb) {
  const double n = static_cast<double>(p.X.size());
  for (auto& row : gW) std::fill(row.begin(), row.end(), 0.0);
  std::fill(gb.begin(), gb.end(), 0.0);
  for (std::size_t i = 0; i < p.X.size(); ++i) {
    auto probs = softmax(logits_of(p, W, b, i));
    for (int c = 0; c < p.n_classes; ++c) {
      double delta = probs[static_cast<std::size_t>(c)] - (p.y[i] == c ? 1.0 : 0.0);
      delta *= p.sample_weight[i] / n;
      if (delta == 0.0) continue;
      auto& row = gW[static_cast<std::size_t>(c)];
      for (const auto& [id, v] : p.X[i].entries) row[static_cast<std::size_t>(id)] += delta * v;
      gb[static_cast<std::size_t>(c)] += delta;
    }
  }
  double norm2 = 0.0;
  for (int c = 0; c < p.n_classes; ++c) {
    auto& row = gW[static_cast<std::size_t>(c)];
    const auto& wrow = W[static_cast<std::size_t>(c)];
    for (std::size_t f = 0; f < row.size(); ++f) {
      row[f] += wrow[f] / p.C;
      norm2 += row[f] * row[f];
    }
    norm2 += gb[static_cast<std::size_t>(c)] * gb[static_cast<std::size_t>(c)];
  }
  return norm2;
}

}  // namespace detail

struct LogisticTrainOptions {
  int max_epochs = 2000;
  double grad_tolerance = 1e-5;
};

inline std::unique_ptr<LogisticModel> train_logistic(
    const std::vector<SparseVector>& X, const std::vector<int>& y,
    const std::vector<std::string>& class_names, double C, std::uint64_t seed = 0,
    bool class_weighted = false, const LogisticTrainOptions& opts = {}) {
  (void)seed;  // the optimizer is deterministic; kept for interface uniformity
  if (!(C > 0.0)) throw TrainError("penalty C must be positive");
  const int k = static_cast<int>(class_names.size());
  detail::validate_training_input(X, y, k, true);

  auto m = std::make_unique<LogisticModel>();
  m->classes = class_names;
  m->C = C;
  m->dim = detail::feature_dim(X);
  m->weights.assign(static_cast<std::size_t>(k),
                    std::vector<double>(static_cast<std::size_t>(m->dim), 0.0));
  m->bias.assign(static_cast<std::size_t>(k), 0.0);

  const auto sw = detail::sample_weights(y, k, class_weighted);
  detail::LogisticProblem prob{X, y, sw, k, m->dim, C};

  // Constant step 1/L from the softmax curvature bound (1/2 per unit of
  // squared augmented-feature norm) plus the ridge term.
  double max_sq = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    double s = 0.0;
    for (const auto& [id, v] : X[i].entries) s += v * v;
    max_sq = std::max(max_sq, sw[i] * (s + 1.0));
  }
  const double step = 1.0 / (0.5 * max_sq + 1.0 / C);

  std::vector<std::vector<double>> gW(static_cast<std::size_t>(k),
                                      std::vector<double>(static_cast<std::size_t>(m->dim), 0.0));
  std::vector<double> gb(static_cast<std::size_t>(k), 0.0);
  for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
    const double norm2 = detail::logistic_gradient(prob, m->weights, m->bias, gW, gb);
    if (std::sqrt(norm2) < opts.grad_tolerance) break;
    for (int c = 0; c < k; ++c) {
      auto& row = m->weights[static_cast<std::size_t>(c)];
      const auto& grow = gW[static_cast<std::size_t>(c)];
      for (std::size_t f = 0; f < row.size(); ++f) row[f] -= step * grow[f];
      m->bias[static_cast<std::size_t>(c)] -= step * gb[static_cast<std::size_t>(c)];
    }
  }
  return m;
}

}  // namespace esgcls
