#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flowsift/features.hpp"
#include "flowsift/flow.hpp"
#include "flowsift/random.hpp"

namespace flowsift {

struct TreeConfig {
  std::size_t max_depth = 20;
  std::size_t min_samples_split = 20;
  std::size_t min_samples_leaf = 10;

  void validate() const;
};

/// Flat tree node. Internal nodes route x[feature] <= threshold to `left`,
/// everything else to `right`. Leaves have feature == kLeaf.
struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;

  std::int32_t feature = kLeaf;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double threshold = 0.0;
  double positive_fraction = 0.0;
  std::uint64_t sample_count = 0;

  bool is_leaf() const { return feature == kLeaf; }
  bool operator==(const TreeNode&) const = default;
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root, preorder layout
  std::size_t n_features = 0;

  /// Positive fraction of the leaf reached by x.
  double predict_proba(std::span<const double> x) const;
  const TreeNode& leaf_for(std::span<const double> x) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;
  bool operator==(const TreeModel&) const = default;
};

/// Gini impurity 1 - p0^2 - p1^2 of a node with the given class counts.
double gini(std::uint64_t pos, std::uint64_t neg);

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double weighted_gini = 0.0;  // (n_L*Gini_L + n_R*Gini_R) / n
  bool operator==(const SplitCandidate&) const = default;
};

/// Best Gini split of the node made of `rows` (duplicates allowed) over the
/// candidate features. Thresholds are midpoints between consecutive distinct
/// values. Returns nullopt when no split with both children holding at least
/// `min_samples_leaf` rows lowers the impurity. Ties go to the lowest feature
/// index, then the lowest threshold.
std::optional<SplitCandidate> best_split(const FeatureMatrix& x, std::span<const ClassLabel> y,
                                         std::span<const std::size_t> rows,
                                         std::span<const std::size_t> candidate_features,
                                         std::size_t min_samples_leaf = 1);

/// Draws a fresh subset of `m` features for every node (forest mode).
class FeatureSubsampler {
 public:
  FeatureSubsampler(std::size_t m, std::uint64_t seed) : m_(m), rng_(seed) {}
  /// Sorted subset of size min(m, d) of 0..d-1.
  std::vector<std::size_t> draw(std::size_t d);
  std::size_t m() const { return m_; }

 private:
  std::size_t m_;
  Rng rng_;
};

/// Column-major copy of the training data with every feature presorted.
/// Built once and shared (read-only) by all trees of a forest.
class TreeTrainingSet {
 public:
  TreeTrainingSet(const FeatureMatrix& x, std::span<const ClassLabel> y);

  std::size_t rows() const { return n_; }
  std::size_t cols() const { return d_; }
  double value(std::size_t feature, std::size_t row) const { return columns_[feature * n_ + row]; }
  bool positive(std::size_t row) const { return labels_[row] != 0; }
  std::span<const std::uint32_t> sorted(std::size_t feature) const {
    return {sorted_.data() + feature * n_, n_};
  }

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> columns_;
  std::vector<std::uint8_t> labels_;
  std::vector<std::uint32_t> sorted_;
};

/// Greedy CART construction. `weights` gives per-row multiplicities (a
/// bootstrap sample); empty means every row once. Equivalent to recursively
/// applying best_split with sort-at-node.
TreeModel train_tree(const TreeTrainingSet& data, const TreeConfig& config,
                     FeatureSubsampler* sampler = nullptr,
                     std::span<const std::uint32_t> weights = {});

TreeModel train_tree(const FeatureMatrix& x, std::span<const ClassLabel> y,
                     const TreeConfig& config);

}  // namespace flowsift
