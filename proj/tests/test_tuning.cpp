#include <catch2/catch_amalgamated.hpp>

#include <set>

#include <esgcls/rng.hpp>
#include <esgcls/tuning.hpp>

using namespace esgcls;

namespace {

SparseVector sv(std::initializer_list<std::pair<int, double>> entries) {
  SparseVector v;
  for (const auto& e : entries) v.entries.push_back(e);
  return v;
}

const std::vector<std::string> kTwo = {"A", "B"};

// Quadrant clusters with xor labels: depth-1 stumps cannot beat chance, a
// deeper tree separates perfectly.
void make_xor_clusters(std::vector<SparseVector>& X, std::vector<int>& y, int per_quadrant) {
  Rng rng(1001);
  for (int q = 0; q < 4; ++q) {
    const double f0 = (q & 1) ? 1.0 : 0.0;
    const double f1 = (q & 2) ? 1.0 : 0.0;
    for (int i = 0; i < per_quadrant; ++i) {
      SparseVector x;
      const double j0 = f0 + 0.05 * rng.next_double();
      const double j1 = f1 + 0.05 * rng.next_double();
      if (j0 > 0.0) x.entries.push_back({0, j0});
      if (j1 > 0.0) x.entries.push_back({1, j1});
      X.push_back(std::move(x));
      y.push_back(((q & 1) != 0) != ((q & 2) != 0) ? 1 : 0);
    }
  }
}

}  // namespace

TEST_CASE("stratified split keeps per-class ratios") {
  std::vector<int> y;
  for (int i = 0; i < 100; ++i) y.push_back(0);
  for (int i = 0; i < 10; ++i) y.push_back(1);
  auto [train, val] = stratified_split(y, 2, 0.2, 7);
  CHECK(train.size() == 88);
  CHECK(val.size() == 22);

  std::set<int> seen(train.begin(), train.end());
  for (int i : val) CHECK(seen.insert(i).second);  // disjoint
  CHECK(seen.size() == y.size());

  int val_minor = 0;
  for (int i : val)
    if (y[static_cast<std::size_t>(i)] == 1) ++val_minor;
  CHECK(val_minor == 2);
}

TEST_CASE("a one-point grid wins trivially") {
  std::vector<SparseVector> X = {sv({{0, 1.0}}), sv({{1, 1.0}})};
  std::vector<int> y = {0, 1};
  TrainConfig cfg;
  cfg.kind = ModelKind::logistic;
  cfg.C = 1.0;
  auto result = tune({cfg}, X, y, kTwo, 3);
  CHECK(result.best_index == 0);
  CHECK(result.failures.empty());
  REQUIRE(result.model != nullptr);
}

TEST_CASE("tuning prefers the setting with higher inner weighted F1") {
  SECTION("a deeper tree is required") {
    std::vector<SparseVector> X;
    std::vector<int> y;
    make_xor_clusters(X, y, 40);

    TrainConfig shallow;
    shallow.kind = ModelKind::random_forest;
    shallow.n_trees = 15;
    shallow.max_depth = 1;
    TrainConfig deep = shallow;
    deep.max_depth = 6;

    auto result = tune({shallow, deep}, X, y, kTwo, 11);
    CHECK(result.best_index == 1);
    CHECK(result.inner_f1[1] > result.inner_f1[0]);
  }
  SECTION("an underfit penalty loses") {
    Rng rng(5);
    std::vector<SparseVector> X;
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
      const int cls = static_cast<int>(rng.below(2));
      X.push_back(sv({{cls, 0.8 + 0.2 * rng.next_double()}}));
      y.push_back(cls);
    }
    TrainConfig weak;
    weak.kind = ModelKind::logistic;
    weak.C = 1e-9;
    TrainConfig strong = weak;
    strong.C = 10.0;
    auto result = tune({weak, strong}, X, y, kTwo, 13);
    CHECK(result.best_index == 1);
  }
}

TEST_CASE("ties keep the first grid entry") {
  std::vector<SparseVector> X;
  std::vector<int> y;
  Rng rng(8);
  for (int i = 0; i < 40; ++i) {
    const int cls = static_cast<int>(rng.below(2));
    X.push_back(sv({{cls, 1.0}}));
    y.push_back(cls);
  }
  TrainConfig cfg;
  cfg.kind = ModelKind::logistic;
  cfg.C = 1.0;
  auto result = tune({cfg, cfg, cfg}, X, y, kTwo, 2);
  CHECK(result.best_index == 0);
}

TEST_CASE("failing grid points are recorded and skipped") {
  std::vector<SparseVector> X = {sv({{0, 1.0}}), sv({{1, 1.0}}), sv({{0, 0.9}}), sv({{1, 0.8}}),
                                 sv({{0, 0.8}}), sv({{1, 0.7}}), sv({{0, 0.7}}), sv({{1, 0.9}}),
                                 sv({{0, 0.6}}), sv({{1, 0.6}})};
  std::vector<int> y = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  TrainConfig bad;
  bad.kind = ModelKind::svm;
  bad.C = -1.0;  // rejected by the trainer
  TrainConfig good;
  good.kind = ModelKind::svm;
  good.C = 1.0;

  auto result = tune({bad, good}, X, y, kTwo, 4);
  CHECK(result.best_index == 1);
  REQUIRE(result.failures.size() == 1);
  CHECK(result.failures[0].find("0:") == 0);

  CHECK_THROWS_AS(tune({bad, bad}, X, y, kTwo, 4), TrainError);
  CHECK_THROWS_AS(tune({}, X, y, kTwo, 4), TrainError);
}
