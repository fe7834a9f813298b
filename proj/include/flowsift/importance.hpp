#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "flowsift/features.hpp"
#include "flowsift/flow.hpp"

namespace flowsift {

struct TrainedModel;

struct FeatureImportance {
  std::size_t index = 0;
  std::string feature;
  double mean_drop = 0.0;
  double std_drop = 0.0;  // sample standard deviation over repeats, 0 for one repeat
  std::vector<double> drops;
};

struct ImportanceReport {
  double baseline_pr_auc = 0.0;
  std::size_t repeats = 0;
  std::uint64_t seed = 0;
  std::vector<FeatureImportance> features;  // sorted by mean_drop, descending
};

using RowScorer = std::function<double(std::span<const double>)>;

/// PR-AUC drop when one column of `test` is shuffled, per feature and repeat.
/// The shuffle for (feature j, repeat r) is seeded from (seed, j, r), so the
/// report does not depend on `threads`.
ImportanceReport permutation_importance(const RowScorer& scorer, const FeatureMatrix& test,
                                        std::span<const ClassLabel> labels,
                                        std::span<const std::string> feature_names,
                                        std::size_t repeats, std::uint64_t seed,
                                        std::size_t threads = 0);

ImportanceReport permutation_importance(const TrainedModel& model, const FeatureMatrix& test,
                                        std::span<const ClassLabel> labels, std::size_t repeats = 5,
                                        std::uint64_t seed = 0, std::size_t threads = 0);

}  // namespace flowsift
