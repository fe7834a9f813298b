#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flowsift/tree.hpp"

namespace flowsift {

struct ForestConfig {
  std::size_t n_trees = 300;
  TreeConfig tree;
  /// Features considered per node; defaults to floor(sqrt(d)).
  std::optional<std::size_t> max_features;
  /// Off only as a test hook: every tree then sees the full training set.
  bool bootstrap = true;
  /// Worker threads; 0 uses the hardware concurrency. Output does not depend on it.
  std::size_t threads = 0;

  void validate() const;
};

struct ForestModel {
  std::vector<TreeModel> trees;
  std::size_t feature_subsample = 1;
  std::uint64_t seed = 0;

  /// Mean of the trees' leaf positive fractions.
  double predict_proba(std::span<const double> x) const;
  /// Fraction of trees whose own hard vote (leaf fraction >= 0.5) is Botnet.
  double vote_fraction(std::span<const double> x) const;
  /// Majority vote over per-tree hard votes.
  ClassLabel predict_vote(std::span<const double> x) const;
  bool operator==(const ForestModel&) const = default;
};

std::size_t default_max_features(std::size_t d);

/// Each tree k is grown on its own bootstrap sample with its own feature
/// subsampler, both seeded from (seed, k), so trees can be trained in any
/// order or in parallel with identical results.
ForestModel train_forest(const FeatureMatrix& x, std::span<const ClassLabel> y,
                         const ForestConfig& config, std::uint64_t seed);

}  // namespace flowsift
