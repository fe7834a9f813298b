#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "flowsift/error.hpp"
#include "flowsift/tree.hpp"
#include "test_support.hpp"

using namespace flowsift;

namespace {

using u128 = unsigned __int128;

// Exact split quality as a fraction num/den, larger is better
// (sum over children of (p^2 + n^2) / count).
struct Quality {
  u128 num = 0;
  u128 den = 1;
};

bool better(const Quality& a, const Quality& b) { return a.num * b.den > b.num * a.den; }

struct OracleSplit {
  std::size_t feature;
  double threshold;
};

// Enumerates every feature and every threshold between distinct values.
std::optional<OracleSplit> oracle_best_split(const FeatureMatrix& x, std::span<const ClassLabel> y,
                                             std::span<const std::size_t> rows,
                                             std::span<const std::size_t> features,
                                             std::size_t min_leaf) {
  std::uint64_t P = 0, N = 0;
  for (auto r : rows) (y[r] == ClassLabel::Botnet ? P : N) += 1;
  const Quality parent{u128(P) * P + u128(N) * N, P + N};
  std::optional<OracleSplit> best;
  Quality best_q;
  for (auto f : features) {
    std::set<double> values;
    for (auto r : rows) values.insert(x.at(r, f));
    std::vector<double> sorted(values.begin(), values.end());
    for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
      const double t = (sorted[k] + sorted[k + 1]) / 2;
      std::uint64_t lp = 0, ln = 0, rp = 0, rn = 0;
      for (auto r : rows) {
        const bool pos = y[r] == ClassLabel::Botnet;
        if (x.at(r, f) <= t)
          (pos ? lp : ln) += 1;
        else
          (pos ? rp : rn) += 1;
      }
      if (lp + ln < min_leaf || rp + rn < min_leaf) continue;
      const u128 cl = lp + ln, cr = rp + rn;
      const Quality q{(u128(lp) * lp + u128(ln) * ln) * cr + (u128(rp) * rp + u128(rn) * rn) * cl,
                      cl * cr};
      if (!better(q, parent)) continue;
      if (!best || better(q, best_q)) {
        best = OracleSplit{f, t};
        best_q = q;
      }
    }
  }
  return best;
}

// Recursive builder straight from the definition: sort at every node.
struct NaiveBuilder {
  const FeatureMatrix& x;
  std::span<const ClassLabel> y;
  TreeConfig config;
  FeatureSubsampler* sampler;
  std::vector<TreeNode> nodes;

  std::uint32_t grow(std::vector<std::size_t> rows, std::size_t depth) {
    std::uint64_t pos = 0;
    for (auto r : rows) pos += y[r] == ClassLabel::Botnet ? 1 : 0;
    const std::uint64_t total = rows.size(), neg = total - pos;
    const auto index = static_cast<std::uint32_t>(nodes.size());
    TreeNode leaf;
    leaf.positive_fraction = static_cast<double>(pos) / static_cast<double>(total);
    leaf.sample_count = total;
    nodes.push_back(leaf);
    if (depth >= config.max_depth || total < config.min_samples_split || pos == 0 || neg == 0)
      return index;
    std::vector<std::size_t> features(x.cols);
    std::iota(features.begin(), features.end(), std::size_t{0});
    if (sampler != nullptr) features = sampler->draw(x.cols);
    const auto split = best_split(x, y, rows, features, config.min_samples_leaf);
    if (!split) return index;
    std::vector<std::size_t> left, right;
    for (auto r : rows) (x.at(r, split->feature) <= split->threshold ? left : right).push_back(r);
    const auto l = grow(std::move(left), depth + 1);
    const auto rr = grow(std::move(right), depth + 1);
    nodes[index].feature = static_cast<std::int32_t>(split->feature);
    nodes[index].threshold = split->threshold;
    nodes[index].left = l;
    nodes[index].right = rr;
    return index;
  }
};

FeatureMatrix four_points() {
  FeatureMatrix x(4, 2);
  const double a[4][2] = {{1, 0}, {2, 0}, {9, 0}, {10, 0}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) x.at(i, j) = a[i][j];
  return x;
}

}  // namespace

TEST_CASE("gini impurity") {
  CHECK(gini(10, 0) == 0.0);
  CHECK(gini(0, 10) == 0.0);
  CHECK(gini(5, 5) == 0.5);
  CHECK(gini(1, 3) == 0.375);
  CHECK_THROWS_AS(gini(0, 0), std::domain_error);
}

TEST_CASE("best split of four points") {
  const auto x = four_points();
  const auto y = testing::to_labels({0, 0, 1, 1});
  const std::vector<std::size_t> rows = {0, 1, 2, 3};
  const std::vector<std::size_t> features = {0, 1};
  const auto s = best_split(x, y, rows, features);
  REQUIRE(s.has_value());
  CHECK(s->feature == 0);
  CHECK(s->threshold == 5.5);
  CHECK(s->weighted_gini == 0.0);
}

TEST_CASE("no split when nothing improves or the node is too small") {
  const auto x = four_points();
  const std::vector<std::size_t> rows = {0, 1, 2, 3};
  const std::vector<std::size_t> only_constant = {1};
  CHECK_FALSE(best_split(x, testing::to_labels({0, 0, 1, 1}), rows, only_constant).has_value());
  const std::vector<std::size_t> both = {0, 1};
  CHECK_FALSE(best_split(x, testing::to_labels({0, 1, 0, 1}), rows, both, 3).has_value());
}

TEST_CASE("best_split agrees with the exhaustive oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + rng.below(12);
    const std::size_t d = 1 + rng.below(4);
    const auto x = testing::random_int_matrix(rng, n, d, 1 + static_cast<int>(rng.below(6)));
    const auto y = testing::random_labels(rng, n, rng.uniform());
    std::vector<std::size_t> rows;
    for (std::size_t k = 0, m = 1 + rng.below(n + 3); k < m; ++k) rows.push_back(rng.below(n));
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), std::size_t{0});
    const std::size_t min_leaf = 1 + rng.below(3);
    const auto got = best_split(x, y, rows, features, min_leaf);
    const auto want = oracle_best_split(x, y, rows, features, min_leaf);
    REQUIRE(got.has_value() == want.has_value());
    if (got) {
      CHECK(got->feature == want->feature);
      CHECK(got->threshold == want->threshold);
    }
  }
}

TEST_CASE("presorted builder equals the sort-at-node builder") {
  Rng rng(77);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 2 + rng.below(200);
    const std::size_t d = 1 + rng.below(5);
    const auto x = testing::random_int_matrix(rng, n, d, 2 + static_cast<int>(rng.below(20)));
    auto y = testing::random_labels(rng, n, 0.1 + 0.5 * rng.uniform());
    TreeConfig config{1 + rng.below(8), 1 + rng.below(6), 1 + rng.below(4)};
    const TreeTrainingSet data(x, y);

    std::vector<std::uint32_t> weights;
    std::vector<std::size_t> rows;
    const bool bootstrap = trial % 2 == 1;
    if (bootstrap) {
      weights.assign(n, 0);
      for (std::size_t k = 0; k < n; ++k) ++weights[rng.below(n)];
      for (std::size_t i = 0; i < n; ++i) rows.insert(rows.end(), weights[i], i);
    } else {
      rows.resize(n);
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    const bool subsample = trial % 3 == 0;
    const std::uint64_t seed = rng.next();
    FeatureSubsampler fast_sampler(1 + d / 2, seed), naive_sampler(1 + d / 2, seed);

    const auto fast = train_tree(data, config, subsample ? &fast_sampler : nullptr, weights);
    NaiveBuilder naive{x, y, config, subsample ? &naive_sampler : nullptr, {}};
    naive.grow(rows, 0);
    REQUIRE(fast.nodes.size() == naive.nodes.size());
    for (std::size_t k = 0; k < fast.nodes.size(); ++k) CHECK(fast.nodes[k] == naive.nodes[k]);
  }
}

TEST_CASE("depth limit and stopping rules") {
  Rng rng(5);
  const auto x = testing::random_int_matrix(rng, 300, 3, 50);
  auto y = testing::random_labels(rng, 300, 0.4);
  const auto stump = train_tree(x, y, {1, 2, 1});
  CHECK(stump.depth() <= 1);
  CHECK(stump.nodes.size() <= 3);
  for (std::size_t depth : {2u, 4u, 7u}) CHECK(train_tree(x, y, {depth, 2, 1}).depth() <= depth);
  const auto big_leaf = train_tree(x, y, {20, 2, 40});
  for (const auto& node : big_leaf.nodes)
    if (node.is_leaf()) CHECK(node.sample_count >= 40);
  const auto no_split = train_tree(x, y, {20, 301, 1});
  CHECK(no_split.nodes.size() == 1);
  CHECK_THROWS_AS(TreeConfig({0, 2, 1}).validate(), ConfigError);
}

TEST_CASE("values equal to the threshold route left") {
  const auto x = four_points();
  const auto y = testing::to_labels({0, 0, 1, 1});
  const auto tree = train_tree(x, y, {3, 2, 1});
  REQUIRE(tree.nodes.size() == 3);
  CHECK(tree.nodes[0].threshold == 5.5);
  CHECK(tree.predict_proba(std::vector<double>{5.5, 0}) == 0.0);
  CHECK(tree.predict_proba(std::vector<double>{5.500001, 0}) == 1.0);
}

TEST_CASE("pure training set makes a single leaf") {
  const auto x = four_points();
  const auto tree = train_tree(x, testing::to_labels({1, 1, 1, 1}), {});
  CHECK(tree.nodes.size() == 1);
  CHECK(tree.predict_proba(x.row(0)) == 1.0);
}

TEST_CASE("predictions are invariant to monotone rescaling of a feature") {
  Rng rng(13);
  auto x = testing::random_int_matrix(rng, 400, 3, 30);
  const auto y = testing::random_labels(rng, 400, 0.3);
  auto scaled = x;
  for (std::size_t i = 0; i < x.rows; ++i) scaled.at(i, 1) = 1000.0 + 7.0 * x.at(i, 1);
  const TreeConfig config{6, 5, 2};
  const auto a = train_tree(x, y, config);
  const auto b = train_tree(scaled, y, config);
  CHECK(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < x.rows; ++i)
    CHECK(a.predict_proba(x.row(i)) == b.predict_proba(scaled.row(i)));
}

TEST_CASE("feature subsampler draws sorted distinct subsets") {
  FeatureSubsampler s(3, 1);
  for (int i = 0; i < 100; ++i) {
    const auto f = s.draw(10);
    REQUIRE(f.size() == 3);
    CHECK(std::is_sorted(f.begin(), f.end()));
    CHECK(std::adjacent_find(f.begin(), f.end()) == f.end());
    CHECK(f.back() < 10);
  }
  CHECK(s.draw(2).size() == 2);
}
