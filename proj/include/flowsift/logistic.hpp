#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flowsift/features.hpp"
#include "flowsift/flow.hpp"

namespace flowsift {

/// Numerically stable logistic function.
double sigmoid(double z);

struct LogisticConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 20;
  double l2 = 1e-4;
  std::size_t batch_size = 4096;
  /// Scales positive-example loss by negatives/positives.
  bool class_weighting = false;

  void validate() const;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;

  double predict_proba(std::span<const double> x) const;
  bool operator==(const LogisticModel&) const = default;
};

struct LogLossGradient {
  double loss = 0.0;
  std::vector<double> grad_weights;
  double grad_bias = 0.0;
};

/// Mean (positive-weighted) log-loss over `rows` plus (l2/2)*||w||^2, with its
/// analytic gradient. The bias is not regularized.
LogLossGradient logistic_objective(const LogisticModel& model, const FeatureMatrix& x,
                                   std::span<const ClassLabel> y,
                                   std::span<const std::size_t> rows, double l2,
                                   double positive_weight = 1.0);

/// Mini-batch gradient descent from zero weights; batches are reshuffled each
/// epoch from `seed`. Expects standardized inputs.
LogisticModel train_logistic(const FeatureMatrix& x, std::span<const ClassLabel> y,
                             const LogisticConfig& config, std::uint64_t seed);

}  // namespace flowsift
