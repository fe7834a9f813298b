#include "flowsift/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "flowsift/error.hpp"

namespace flowsift {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cumulative counts at each distinct score, scanning from the highest score.
struct RankedCounts {
  std::vector<double> thresholds;
  std::vector<std::uint64_t> tp;
  std::vector<std::uint64_t> fp;
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
};

RankedCounts rank(std::span<const double> scores, std::span<const ClassLabel> labels) {
  if (scores.size() != labels.size()) throw MetricError("scores and labels differ in length");
  RankedCounts out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw MetricError("NaN score");
    (labels[i] == ClassLabel::Botnet ? out.positives : out.negatives) += 1;
  }
  if (out.positives == 0 || out.negatives == 0)
    throw MetricError("metric needs at least one positive and one negative example");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto i = order[k];
    (labels[i] == ClassLabel::Botnet ? tp : fp) += 1;
    if (k + 1 == order.size() || scores[order[k + 1]] != scores[i]) {
      out.thresholds.push_back(scores[i]);
      out.tp.push_back(tp);
      out.fp.push_back(fp);
    }
  }
  return out;
}

}  // namespace

ConfusionMatrix confusion_at(std::span<const double> scores, std::span<const ClassLabel> labels,
                             double threshold) {
  if (scores.size() != labels.size()) throw MetricError("scores and labels differ in length");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] == ClassLabel::Botnet;
    if (predicted) {
      (actual ? cm.tp : cm.fp) += 1;
    } else {
      (actual ? cm.fn : cm.tn) += 1;
    }
  }
  return cm;
}

double precision(const ConfusionMatrix& cm) {
  const auto denom = cm.tp + cm.fp;
  return denom == 0 ? 0.0 : static_cast<double>(cm.tp) / static_cast<double>(denom);
}

double recall(const ConfusionMatrix& cm) {
  const auto denom = cm.tp + cm.fn;
  return denom == 0 ? 0.0 : static_cast<double>(cm.tp) / static_cast<double>(denom);
}

double f1(const ConfusionMatrix& cm) {
  const double p = precision(cm);
  const double r = recall(cm);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

Curve pr_curve(std::span<const double> scores, std::span<const ClassLabel> labels) {
  const auto ranked = rank(scores, labels);
  const auto positives = static_cast<double>(ranked.positives);
  Curve curve;
  curve.points.push_back({0.0, 1.0, kInf});
  double previous_recall = 0.0;
  for (std::size_t k = 0; k < ranked.thresholds.size(); ++k) {
    const auto tp = static_cast<double>(ranked.tp[k]);
    const double r = tp / positives;
    const double p = tp / static_cast<double>(ranked.tp[k] + ranked.fp[k]);
    curve.area += (r - previous_recall) * p;
    previous_recall = r;
    curve.points.push_back({r, p, ranked.thresholds[k]});
  }
  return curve;
}

Curve roc_curve(std::span<const double> scores, std::span<const ClassLabel> labels) {
  const auto ranked = rank(scores, labels);
  const auto positives = static_cast<double>(ranked.positives);
  const auto negatives = static_cast<double>(ranked.negatives);
  Curve curve;
  curve.points.push_back({0.0, 0.0, kInf});
  for (std::size_t k = 0; k < ranked.thresholds.size(); ++k) {
    const double fpr = static_cast<double>(ranked.fp[k]) / negatives;
    const double tpr = static_cast<double>(ranked.tp[k]) / positives;
    const auto& last = curve.points.back();
    curve.area += (fpr - last.x) * (tpr + last.y) * 0.5;
    curve.points.push_back({fpr, tpr, ranked.thresholds[k]});
  }
  return curve;
}

double average_precision(std::span<const double> scores, std::span<const ClassLabel> labels) {
  return pr_curve(scores, labels).area;
}

double roc_auc(std::span<const double> scores, std::span<const ClassLabel> labels) {
  return roc_curve(scores, labels).area;
}

ThresholdSweep threshold_sweep(std::span<const double> scores, std::span<const ClassLabel> labels) {
  const auto ranked = rank(scores, labels);
  ThresholdSweep sweep;
  sweep.table.reserve(ranked.thresholds.size());
  for (std::size_t k = 0; k < ranked.thresholds.size(); ++k) {
    ConfusionMatrix cm;
    cm.tp = ranked.tp[k];
    cm.fp = ranked.fp[k];
    cm.fn = ranked.positives - cm.tp;
    cm.tn = ranked.negatives - cm.fp;
    OperatingPoint point{ranked.thresholds[k], precision(cm), recall(cm), f1(cm), cm.tp, cm.fp};
    if (sweep.table.empty() || point.f1 > sweep.best.f1) sweep.best = point;
    sweep.table.push_back(point);
  }
  return sweep;
}

ThresholdMetrics metrics_at(std::span<const double> scores, std::span<const ClassLabel> labels,
                            double threshold) {
  ThresholdMetrics m;
  m.threshold = threshold;
  m.confusion = confusion_at(scores, labels, threshold);
  m.precision = precision(m.confusion);
  m.recall = recall(m.confusion);
  m.f1 = f1(m.confusion);
  return m;
}

EvalReport evaluate(std::span<const double> scores, std::span<const ClassLabel> labels,
                    std::optional<double> tuned_threshold) {
  EvalReport report;
  report.examples = scores.size();
  report.positives =
      static_cast<std::size_t>(std::count(labels.begin(), labels.end(), ClassLabel::Botnet));
  report.prevalence = scores.empty() ? 0.0
                                     : static_cast<double>(report.positives) /
                                           static_cast<double>(report.examples);
  report.roc_auc = roc_auc(scores, labels);
  report.pr_auc = average_precision(scores, labels);
  report.at_default = metrics_at(scores, labels, kDefaultThreshold);
  const double tuned =
      tuned_threshold ? *tuned_threshold : threshold_sweep(scores, labels).best.threshold;
  report.at_tuned = metrics_at(scores, labels, tuned);
  return report;
}

}  // namespace flowsift
