#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>

#include <esgcls/ensemble.hpp>
#include <esgcls/rng.hpp>

using namespace esgcls;

TEST_CASE("score-sum ensemble adds member scores and takes the argmax") {
  auto pred = ensemble_predict({{0.5, 0.3, 0.2}, {0.1, 0.6, 0.3}});
  CHECK(pred.label == 1);
  CHECK(pred.summed[0] == 0.5 + 0.1);
  CHECK(pred.summed[1] == 0.3 + 0.6);
  CHECK(pred.summed[2] == 0.2 + 0.3);
}

TEST_CASE("a single-member ensemble is the identity") {
  const std::vector<double> scores = {0.2, 0.5, 0.3};
  auto pred = ensemble_predict({scores});
  CHECK(pred.summed == scores);
  CHECK(pred.label == 1);
}

TEST_CASE("opposite preferences tie and resolve to class zero") {
  auto pred = ensemble_predict({{0.7, 0.3}, {0.3, 0.7}});
  CHECK(pred.summed[0] == pred.summed[1]);
  CHECK(pred.label == 0);
}

TEST_CASE("ensemble rejects inconsistent members") {
  CHECK_THROWS_AS(ensemble_predict({}), DataError);
  CHECK_THROWS_AS(ensemble_predict({{0.5, 0.5}, {0.3, 0.3, 0.4}}), DataError);
}

TEST_CASE("member order does not change the result") {
  Rng rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<double>> members;
    const int m = 2 + static_cast<int>(rng.below(4));
    for (int i = 0; i < m; ++i) {
      std::vector<double> s = {rng.next_double(), rng.next_double(), rng.next_double()};
      double sum = s[0] + s[1] + s[2];
      for (double& v : s) v /= sum;
      members.push_back(std::move(s));
    }
    auto forward = ensemble_predict(members);
    auto reversed_members = members;
    std::reverse(reversed_members.begin(), reversed_members.end());
    auto reversed = ensemble_predict(reversed_members);
    for (std::size_t c = 0; c < 3; ++c)
      CHECK(forward.summed[c] == Catch::Approx(reversed.summed[c]).margin(1e-12));
    CHECK(forward.label == reversed.label);
  }
}

TEST_CASE("summed entries stay within [0, m] for probability members") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> members;
    const int m = 1 + static_cast<int>(rng.below(5));
    for (int i = 0; i < m; ++i) {
      std::vector<double> s = {rng.next_double(), rng.next_double(), rng.next_double()};
      double sum = s[0] + s[1] + s[2];
      for (double& v : s) v /= sum;
      members.push_back(std::move(s));
    }
    auto pred = ensemble_predict(members);
    for (double v : pred.summed) {
      CHECK(v >= 0.0);
      CHECK(v <= static_cast<double>(m) + 1e-12);
    }
  }
}

TEST_CASE("a uniform member never changes the argmax") {
  Rng rng(123);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> s = {rng.next_double(), rng.next_double(), rng.next_double()};
    // Ensure a clear margin so the comparison is not a tie decided by noise.
    s[rng.below(3)] += 0.5;
    auto without = ensemble_predict({s});
    auto with_uniform = ensemble_predict({s, {1.0 / 3, 1.0 / 3, 1.0 / 3}});
    CHECK(without.label == with_uniform.label);
  }
}

namespace {

class FixedScorer : public TextScorer {
 public:
  FixedScorer(std::vector<std::string> classes, std::vector<double> scores)
      : classes_(std::move(classes)), scores_(std::move(scores)) {}
  std::vector<double> scores(const Document&) const override { return scores_; }
  const std::vector<std::string>& class_names() const override { return classes_; }

 private:
  std::vector<std::string> classes_;
  std::vector<double> scores_;
};

}  // namespace

TEST_CASE("document-level ensembling sums member scores") {
  const std::vector<std::string> classes = {"LT2Y", "Y2TO5", "GT5Y"};
  FixedScorer a(classes, {0.5, 0.3, 0.2});
  FixedScorer b(classes, {0.1, 0.6, 0.3});
  Document doc;
  doc.id = "d";
  doc.body = "text";
  auto pred = ensemble_score_document({&a, &b}, doc);
  CHECK(pred.label == 1);

  FixedScorer mismatched({"low", "medium", "high"}, {0.1, 0.6, 0.3});
  CHECK_THROWS_AS(ensemble_score_document({&a, &mismatched}, doc), DataError);
}
