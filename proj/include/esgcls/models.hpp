#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include <esgcls/classifier.hpp>
#include <esgcls/forest.hpp>
#include <esgcls/logistic.hpp>
#include <esgcls/svm.hpp>

namespace esgcls {

inline std::unique_ptr<Classifier> train_model(const TrainConfig& cfg,
                                               const std::vector<SparseVector>& X,
                                               const std::vector<int>& y,
                                               const std::vector<std::string>& class_names,
                                               std::uint64_t seed) {
  switch (cfg.kind) {
    case ModelKind::logistic:
      return train_logistic(X, y, class_names, cfg.C, seed, cfg.class_weighted);
    case ModelKind::svm:
      return train_svm(X, y, class_names, cfg.C, seed, cfg.class_weighted);
    case ModelKind::random_forest: {
      ForestParams p;
      p.n_trees = cfg.n_trees;
      p.max_depth = cfg.max_depth;
      p.min_samples_split = cfg.min_samples_split;
      p.bootstrap = cfg.bootstrap;
      p.class_weighted = cfg.class_weighted;
      return train_forest(X, y, class_names, p, seed);
    }
    case ModelKind::prior:
      return train_prior(X, y, class_names);
  }
  throw TrainError("unknown model kind");
}

inline std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "logistic") return LogisticModel::from_json(j);
  if (kind == "svm") return SvmModel::from_json(j);
  if (kind == "rf") return ForestModel::from_json(j);
  if (kind == "prior") return PriorClassifier::from_json(j);
  throw DataError("unknown classifier kind '" + kind + "'");
}

/// Default hyperparameter grids when a run does not pin a single setting.
inline std::vector<TrainConfig> default_grid(ModelKind kind, bool class_weighted = false) {
  std::vector<TrainConfig> grid;
  switch (kind) {
    case ModelKind::logistic:
    case ModelKind::svm:
      for (double C : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        TrainConfig c;
        c.kind = kind;
        c.C = C;
        c.class_weighted = class_weighted;
        grid.push_back(c);
      }
      break;
    case ModelKind::random_forest:
      for (int n_trees : {100, 300}) {
        for (int max_depth : {8, 16, 0}) {
          for (int min_split : {2, 5, 10}) {
            TrainConfig c;
            c.kind = kind;
            c.n_trees = n_trees;
            c.max_depth = max_depth;
            c.min_samples_split = min_split;
            c.class_weighted = class_weighted;
            grid.push_back(c);
          }
        }
      }
      break;
    case ModelKind::prior: {
      TrainConfig c;
      c.kind = ModelKind::prior;
      grid.push_back(c);
      break;
    }
  }
  return grid;
}

}  // namespace esgcls
