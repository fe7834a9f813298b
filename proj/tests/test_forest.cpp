#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flowsift/error.hpp"
#include "flowsift/forest.hpp"
#include "flowsift/metrics.hpp"
#include "test_support.hpp"

using namespace flowsift;

namespace {

struct Problem {
  FeatureMatrix x;
  std::vector<ClassLabel> y;
};

Problem noisy(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Problem p{testing::random_int_matrix(rng, n, d, 40), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const double signal = p.x.at(i, 0) + p.x.at(i, 1) + 20 * rng.normal();
    p.y.push_back(signal > 55 ? ClassLabel::Botnet : ClassLabel::Benign);
  }
  testing::force_both_classes(p.y);
  return p;
}

}  // namespace

TEST_CASE("default feature subsample") {
  CHECK(default_max_features(10) == 3);
  CHECK(default_max_features(16) == 4);
  CHECK(default_max_features(1) == 1);
}

TEST_CASE("one tree without bootstrap over all features is a plain tree") {
  const auto p = noisy(300, 4, 1);
  ForestConfig config;
  config.n_trees = 1;
  config.bootstrap = false;
  config.max_features = 4;
  config.tree = {8, 4, 2};
  const auto forest = train_forest(p.x, p.y, config, 3);
  REQUIRE(forest.trees.size() == 1);
  CHECK(forest.trees[0] == train_tree(p.x, p.y, config.tree));
}

TEST_CASE("forests are reproducible and independent of the thread count") {
  const auto p = noisy(500, 6, 2);
  ForestConfig config;
  config.n_trees = 12;
  config.tree = {10, 4, 2};
  config.threads = 1;
  const auto sequential = train_forest(p.x, p.y, config, 11);
  CHECK(sequential == train_forest(p.x, p.y, config, 11));
  config.threads = 4;
  CHECK(sequential == train_forest(p.x, p.y, config, 11));
  CHECK_FALSE(sequential == train_forest(p.x, p.y, config, 12));
}

TEST_CASE("separable data gives perfect ranking") {
  Rng rng(3);
  Problem p{FeatureMatrix(400, 4), {}};
  for (std::size_t i = 0; i < 400; ++i) {
    const bool bot = i % 10 == 0;
    for (std::size_t j = 0; j < 4; ++j) p.x.at(i, j) = rng.normal() + (bot ? 6.0 : 0.0);
    p.y.push_back(bot ? ClassLabel::Botnet : ClassLabel::Benign);
  }
  ForestConfig config;
  config.n_trees = 25;
  config.tree = {20, 2, 1};
  const auto forest = train_forest(p.x, p.y, config, 0);
  std::vector<double> scores;
  for (std::size_t i = 0; i < p.x.rows; ++i) scores.push_back(forest.predict_proba(p.x.row(i)));
  CHECK(average_precision(scores, p.y) == 1.0);
}

TEST_CASE("probability is the mean of tree probabilities") {
  const auto p = noisy(300, 5, 4);
  ForestConfig config;
  config.n_trees = 9;
  config.tree = {6, 4, 2};
  const auto forest = train_forest(p.x, p.y, config, 5);
  CHECK(forest.feature_subsample == 2);
  for (std::size_t i = 0; i < p.x.rows; ++i) {
    double sum = 0;
    std::size_t votes = 0;
    for (const auto& t : forest.trees) {
      sum += t.predict_proba(p.x.row(i));
      votes += t.predict_proba(p.x.row(i)) >= 0.5 ? 1 : 0;
    }
    const double mean = forest.predict_proba(p.x.row(i));
    CHECK(mean >= 0.0);
    CHECK(mean <= 1.0);
    CHECK(std::abs(mean - sum / 9) <= 1e-12);
    CHECK(forest.vote_fraction(p.x.row(i)) == doctest::Approx(votes / 9.0));
    CHECK(forest.predict_vote(p.x.row(i)) ==
          (votes >= 5 ? ClassLabel::Botnet : ClassLabel::Benign));
  }
}

TEST_CASE("configuration checks") {
  ForestConfig config;
  config.n_trees = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.n_trees = 3;
  config.max_features = 0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
}
