#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include <esgcls/classifier.hpp>
#include <esgcls/errors.hpp>
#include <esgcls/rng.hpp>
#include <esgcls/sparse.hpp>

namespace esgcls {

struct ForestParams {
  int n_trees = 100;
  int max_depth = 0;  // 0 = unbounded
  int min_samples_split = 2;
  bool bootstrap = true;
  int mtry = 0;  // 0 = floor(sqrt(dim))
  bool class_weighted = false;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> counts;  // leaf class counts (weighted)

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;
};

/// Random forest over sparse features: seeded bootstrap per tree, Gini splits
/// over a per-node random feature subset, prediction is the plain average of
/// the per-tree leaf class distributions.
class ForestModel : public Classifier {
 public:
  std::vector<std::string> classes;
  int dim = 0;
  ForestParams params;
  std::uint64_t seed = 0;
  std::vector<Tree> trees;

  std::vector<double> tree_distribution(std::size_t t, const SparseVector& x) const {
    const auto& nodes = trees[t].nodes;
    int cur = 0;
    while (!nodes[static_cast<std::size_t>(cur)].is_leaf()) {
      const auto& nd = nodes[static_cast<std::size_t>(cur)];
      cur = x.at(nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    const auto& counts = nodes[static_cast<std::size_t>(cur)].counts;
    double total = 0.0;
    for (double c : counts) total += c;
    std::vector<double> dist(counts.size(), 0.0);
    for (std::size_t c = 0; c < counts.size(); ++c) dist[c] = counts[c] / total;
    return dist;
  }

  std::vector<double> predict_scores(const SparseVector& x) const override {
    std::vector<double> sum(classes.size(), 0.0);
    for (std::size_t t = 0; t < trees.size(); ++t) {
      const auto dist = tree_distribution(t, x);
      for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += dist[c];
    }
    for (double& v : sum) v /= static_cast<double>(trees.size());
    return sum;
  }

  const std::vector<std::string>& class_names() const override { return classes; }

  nlohmann::json to_json() const override {
    nlohmann::json j;
    j["kind"] = "rf";
    j["classes"] = classes;
    j["dim"] = dim;
    j["seed"] = seed;
    j["params"] = {{"n_trees", params.n_trees},
                   {"max_depth", params.max_depth},
                   {"min_samples_split", params.min_samples_split},
                   {"bootstrap", params.bootstrap},
                   {"mtry", params.mtry},
                   {"class_weighted", params.class_weighted}};
    auto trees_json = nlohmann::json::array();
    for (const auto& tree : trees) {
      auto nodes = nlohmann::json::array();
      for (const auto& nd : tree.nodes) {
        if (nd.is_leaf())
          nodes.push_back({{"counts", nd.counts}});
        else
          nodes.push_back({{"f", nd.feature}, {"t", nd.threshold}, {"l", nd.left}, {"r", nd.right}});
      }
      trees_json.push_back(std::move(nodes));
    }
    j["trees"] = trees_json;
    return j;
  }

  static std::unique_ptr<ForestModel> from_json(const nlohmann::json& j) {
    auto m = std::make_unique<ForestModel>();
    m->classes = j.at("classes").get<std::vector<std::string>>();
    m->dim = j.at("dim").get<int>();
    m->seed = j.at("seed").get<std::uint64_t>();
    const auto& p = j.at("params");
    m->params.n_trees = p.at("n_trees").get<int>();
    m->params.max_depth = p.at("max_depth").get<int>();
    m->params.min_samples_split = p.at("min_samples_split").get<int>();
    m->params.bootstrap = p.at("bootstrap").get<bool>();
    m->params.mtry = p.at("mtry").get<int>();
    m->params.class_weighted = p.at("class_weighted").get<bool>();
    for (const auto& tree_json : j.at("trees")) {
      Tree tree;
      for (const auto& nj : tree_json) {
        TreeNode nd;
        if (nj.contains("counts")) {
          nd.counts = nj["counts"].get<std::vector<double>>();
        } else {
          nd.feature = nj.at("f").get<int>();
          nd.threshold = nj.at("t").get<double>();
          nd.left = nj.at("l").get<int>();
          nd.right = nj.at("r").get<int>();
        }
        tree.nodes.push_back(std::move(nd));
      }
      m->trees.push_back(std::move(tree));
    }
    return m;
  }
};

namespace detail {

struct SplitChoice {
  bool valid = false;
  int feature = -1;
  double threshold = 0.0;
  double child_gini = 0.0;  // weighted child impurity, lower is better

  bool better_than(const SplitChoice& o) const {
    if (!valid) return false;
    if (!o.valid) return true;
    if (child_gini != o.child_gini) return child_gini < o.child_gini;
    if (feature != o.feature) return feature < o.feature;
    return threshold < o.threshold;
  }
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<SparseVector>& X, const std::vector<int>& y,
              const std::vector<double>& sw, int n_classes, int dim,
              const ForestParams& params, Rng& rng)
      : X_(X), y_(y), sw_(sw), n_classes_(n_classes), dim_(dim), params_(params), rng_(rng) {
    mtry_ = params.mtry > 0 ? params.mtry
                            : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(dim))));
    mtry_ = std::min(mtry_, dim_);
  }

  Tree build(std::vector<int> samples) {
    Tree tree;
    build_node(tree, std::move(samples), 0);
    return tree;
  }

 private:
  using Column = std::vector<std::pair<int, double>>;  // (sample occurrence, value)

  std::vector<double> class_counts(const std::vector<int>& samples) const {
    std::vector<double> counts(static_cast<std::size_t>(n_classes_), 0.0);
    for (int i : samples)
      counts[static_cast<std::size_t>(y_[static_cast<std::size_t>(i)])] +=
          sw_[static_cast<std::size_t>(i)];
    return counts;
  }

  static double gini(const std::vector<double>& counts, double total) {
    double g = 1.0;
    for (double c : counts) {
      const double p = c / total;
      g -= p * p;
    }
    return g;
  }

  // Best threshold for one feature given its nonzero column within the node.
  // Samples absent from the column sit in an implicit group at value zero.
  SplitChoice evaluate_feature(int feature, const Column& col,
                               const std::vector<int>& samples,
                               const std::vector<double>& node_counts,
                               double node_weight) const {
    SplitChoice best;
    std::vector<std::pair<double, int>> vals;  // (value, occurrence index)
    vals.reserve(col.size());
    for (const auto& [i, v] : col) vals.push_back({v, i});
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // Aggregate equal values into groups of per-class weighted counts.
    std::vector<double> group_values;
    std::vector<std::vector<double>> group_counts;
    std::vector<double> group_weights;
    std::vector<double> nonzero_counts(static_cast<std::size_t>(n_classes_), 0.0);
    for (std::size_t i = 0; i < vals.size();) {
      std::size_t j = i;
      std::vector<double> counts(static_cast<std::size_t>(n_classes_), 0.0);
      double weight = 0.0;
      while (j < vals.size() && vals[j].first == vals[i].first) {
        const int occ = vals[j].second;
        const double w = sw_[static_cast<std::size_t>(occ)];
        counts[static_cast<std::size_t>(y_[static_cast<std::size_t>(occ)])] += w;
        weight += w;
        ++j;
      }
      for (std::size_t c = 0; c < counts.size(); ++c) nonzero_counts[c] += counts[c];
      group_values.push_back(vals[i].first);
      group_counts.push_back(std::move(counts));
      group_weights.push_back(weight);
      i = j;
    }

    const std::size_t n_zero = samples.size() - col.size();
    if (n_zero > 0) {
      std::vector<double> zero_counts(static_cast<std::size_t>(n_classes_), 0.0);
      double zero_weight = 0.0;
      for (std::size_t c = 0; c < zero_counts.size(); ++c) {
        zero_counts[c] = node_counts[c] - nonzero_counts[c];
        zero_weight += zero_counts[c];
      }
      auto pos = std::lower_bound(group_values.begin(), group_values.end(), 0.0);
      const auto idx = static_cast<std::size_t>(pos - group_values.begin());
      if (idx < group_values.size() && group_values[idx] == 0.0) {
        for (std::size_t c = 0; c < zero_counts.size(); ++c) group_counts[idx][c] += zero_counts[c];
        group_weights[idx] += zero_weight;
      } else {
        group_values.insert(pos, 0.0);
        group_counts.insert(group_counts.begin() + static_cast<std::ptrdiff_t>(idx), std::move(zero_counts));
        group_weights.insert(group_weights.begin() + static_cast<std::ptrdiff_t>(idx), zero_weight);
      }
    }

    if (group_values.size() < 2) return best;  // constant within the node

    std::vector<double> left(static_cast<std::size_t>(n_classes_), 0.0);
    double left_weight = 0.0;
    for (std::size_t g = 0; g + 1 < group_values.size(); ++g) {
      for (std::size_t c = 0; c < left.size(); ++c) left[c] += group_counts[g][c];
      left_weight += group_weights[g];
      const double right_weight = node_weight - left_weight;
      std::vector<double> right(static_cast<std::size_t>(n_classes_), 0.0);
      for (std::size_t c = 0; c < right.size(); ++c) right[c] = node_counts[c] - left[c];
      const double child =
          (left_weight * gini(left, left_weight) + right_weight * gini(right, right_weight)) /
          node_weight;
      // Midpoint, clamped so the boundary group really stays on the left even
      // when the average rounds up to the next representable value.
      double thr = (group_values[g] + group_values[g + 1]) / 2.0;
      if (!(thr < group_values[g + 1])) thr = group_values[g];
      SplitChoice cand{true, feature, thr, child};
      if (cand.better_than(best)) best = cand;
    }
    return best;
  }

  int build_node(Tree& tree, std::vector<int> samples, int depth) {
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});

    auto counts = class_counts(samples);
    double node_weight = 0.0;
    int present = 0;
    for (double c : counts) {
      node_weight += c;
      present += c > 0.0 ? 1 : 0;
    }

    const bool depth_capped = params_.max_depth > 0 && depth >= params_.max_depth;
    if (present <= 1 || depth_capped ||
        static_cast<int>(samples.size()) < std::max(2, params_.min_samples_split)) {
      tree.nodes[static_cast<std::size_t>(idx)].counts = std::move(counts);
      return idx;
    }

    // Nonzero values per feature within this node, in node-occurrence order.
    std::unordered_map<int, Column> columns;
    for (int i : samples) {
      for (const auto& [f, v] : X_[static_cast<std::size_t>(i)].entries)
        columns[f].push_back({i, v});
    }

    SplitChoice best;
    if (mtry_ >= dim_) {
      best = evaluate_all(columns, samples, counts, node_weight);
    } else {
      std::unordered_set<int> drawn;
      std::vector<int> candidates;
      candidates.reserve(static_cast<std::size_t>(mtry_));
      while (static_cast<int>(candidates.size()) < mtry_) {
        const int f = static_cast<int>(rng_.below(static_cast<std::uint64_t>(dim_)));
        if (drawn.insert(f).second) candidates.push_back(f);
      }
      std::sort(candidates.begin(), candidates.end());
      for (int f : candidates) {
        auto it = columns.find(f);
        if (it == columns.end()) continue;  // all-zero within the node
        auto cand = evaluate_feature(f, it->second, samples, counts, node_weight);
        if (cand.better_than(best)) best = cand;
      }
      // No usable candidate drawn: fall back to every feature active in the
      // node so that an impure node with any varying feature still splits.
      if (!best.valid) best = evaluate_all(columns, samples, counts, node_weight);
    }

    if (!best.valid) {
      tree.nodes[static_cast<std::size_t>(idx)].counts = std::move(counts);
      return idx;
    }

    std::unordered_map<int, double> value_of;
    for (const auto& [i, v] : columns[best.feature]) value_of.emplace(i, v);
    std::vector<int> left_samples, right_samples;
    for (int i : samples) {
      auto it = value_of.find(i);
      const double v = it == value_of.end() ? 0.0 : it->second;
      (v <= best.threshold ? left_samples : right_samples).push_back(i);
    }

    samples.clear();
    samples.shrink_to_fit();
    const int left = build_node(tree, std::move(left_samples), depth + 1);
    const int right = build_node(tree, std::move(right_samples), depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(idx)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return idx;
  }

  SplitChoice evaluate_all(const std::unordered_map<int, Column>& columns,
                           const std::vector<int>& samples,
                           const std::vector<double>& counts, double node_weight) const {
    std::vector<int> features;
    features.reserve(columns.size());
    for (const auto& [f, col] : columns) features.push_back(f);
    std::sort(features.begin(), features.end());
    SplitChoice best;
    for (int f : features) {
      auto cand = evaluate_feature(f, columns.at(f), samples, counts, node_weight);
      if (cand.better_than(best)) best = cand;
    }
    return best;
  }

  const std::vector<SparseVector>& X_;
  const std::vector<int>& y_;
  const std::vector<double>& sw_;
  int n_classes_;
  int dim_;
  ForestParams params_;
  Rng& rng_;
  int mtry_ = 1;
};

}  // namespace detail

inline std::unique_ptr<ForestModel> train_forest(const std::vector<SparseVector>& X,
                                                 const std::vector<int>& y,
                                                 const std::vector<std::string>& class_names,
                                                 const ForestParams& params,
                                                 std::uint64_t seed) {
  if (params.n_trees < 1) throw TrainError("forest needs at least one tree");
  const int k = static_cast<int>(class_names.size());
  detail::validate_training_input(X, y, k, true);

  auto m = std::make_unique<ForestModel>();
  m->classes = class_names;
  m->dim = detail::feature_dim(X);
  m->params = params;
  m->seed = seed;

  const auto sw = detail::sample_weights(y, k, params.class_weighted);
  const auto n = X.size();
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(seed, "tree", static_cast<std::uint64_t>(t)));
    std::vector<int> samples;
    samples.reserve(n);
    if (params.bootstrap) {
      for (std::size_t i = 0; i < n; ++i)
        samples.push_back(static_cast<int>(rng.below(n)));
    } else {
      for (std::size_t i = 0; i < n; ++i) samples.push_back(static_cast<int>(i));
    }
    detail::TreeBuilder builder(X, y, sw, k, m->dim, params, rng);
    m->trees.push_back(builder.build(std::move(samples)));
  }
  return m;
}

}  // namespace esgcls
