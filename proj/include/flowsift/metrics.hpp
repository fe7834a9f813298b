#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flowsift/flow.hpp"

namespace flowsift {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Predictions use score >= threshold, the same rule as classify().
ConfusionMatrix confusion_at(std::span<const double> scores, std::span<const ClassLabel> labels,
                             double threshold);

// Degenerate denominators yield 0.
double precision(const ConfusionMatrix& cm);
double recall(const ConfusionMatrix& cm);
double f1(const ConfusionMatrix& cm);

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  double threshold = 0.0;  // +inf for the leading point
};

struct Curve {
  std::vector<CurvePoint> points;
  double area = 0.0;
};

/// Precision (y) against recall (x) at every distinct score, descending.
/// Area is average precision: sum over thresholds of (R_n - R_{n-1}) * P_n.
/// Throws MetricError unless both classes are present.
Curve pr_curve(std::span<const double> scores, std::span<const ClassLabel> labels);

/// TPR (y) against FPR (x); area by the trapezoidal rule.
Curve roc_curve(std::span<const double> scores, std::span<const ClassLabel> labels);

double average_precision(std::span<const double> scores, std::span<const ClassLabel> labels);
double roc_auc(std::span<const double> scores, std::span<const ClassLabel> labels);

struct OperatingPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
};

struct ThresholdSweep {
  OperatingPoint best;
  std::vector<OperatingPoint> table;  // one row per distinct score, descending
};

/// Evaluates every distinct score as a threshold and keeps the best F1; equal
/// F1 values resolve toward the higher threshold.
ThresholdSweep threshold_sweep(std::span<const double> scores, std::span<const ClassLabel> labels);

struct ThresholdMetrics {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionMatrix confusion;
};

ThresholdMetrics metrics_at(std::span<const double> scores, std::span<const ClassLabel> labels,
                            double threshold);

struct EvalReport {
  std::size_t examples = 0;
  std::size_t positives = 0;
  double prevalence = 0.0;
  double roc_auc = 0.0;
  double pr_auc = 0.0;
  ThresholdMetrics at_default;  // T = 0.5
  ThresholdMetrics at_tuned;
};

inline constexpr double kDefaultThreshold = 0.5;

/// Full report. Without `tuned_threshold` the best-F1 threshold on these
/// scores is used.
EvalReport evaluate(std::span<const double> scores, std::span<const ClassLabel> labels,
                    std::optional<double> tuned_threshold = std::nullopt);

}  // namespace flowsift
