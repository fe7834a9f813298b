#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "flowsift/forest.hpp"
#include "flowsift/ingest.hpp"
#include "flowsift/logistic.hpp"
#include "flowsift/metrics.hpp"
#include "flowsift/model.hpp"
#include "flowsift/split.hpp"
#include "flowsift/synth.hpp"
#include "flowsift/tree.hpp"

namespace flowsift {

/// Where the tuned (best-F1) threshold is chosen.
enum class TuneOn { Test, Validation };

struct PipelineConfig {
  ModelKind kind = ModelKind::Forest;
  LogisticConfig logistic;
  TreeConfig tree;
  ForestConfig forest;  // forest.tree is replaced by `tree`
  SplitSpec split;
  std::uint64_t seed = 0;
  TuneOn tune_on = TuneOn::Test;
  /// Share of the training split held out when tune_on == Validation.
  double validation_fraction = 0.2;
};

struct Dataset {
  std::vector<RawFlow> flows;
  std::vector<ClassLabel> labels;
  IngestStats stats;
};

/// Reads and concatenates labeled binetflow files, in the given order.
Dataset load_dataset(std::span<const std::filesystem::path> paths,
                     const ColumnMapping& mapping = {});
Dataset dataset_from(std::span<const SynthFlow> flows);

/// Fits the schema (and, for logistic regression only, the standardizer) on
/// the given training flows and trains the configured learner.
TrainedModel fit_model(std::span<const RawFlow> flows, std::span<const ClassLabel> labels,
                       const PipelineConfig& config);

struct TrainResult {
  TrainedModel model;
  SplitIndices split;
  std::optional<double> validation_threshold;
  double train_seconds = 0.0;
};

/// Stratified split, then fit_model on the training part.
TrainResult train_pipeline(const Dataset& data, const PipelineConfig& config);

struct Evaluation {
  EvalReport report;
  Curve pr;
  Curve roc;
  ThresholdSweep sweep;
  std::vector<double> scores;
};

Evaluation evaluate_model(const TrainedModel& model, std::span<const RawFlow> flows,
                          std::span<const ClassLabel> labels,
                          std::optional<double> tuned_threshold = std::nullopt);

template <typename T>
std::vector<T> gather(std::span<const T> values, std::span<const std::size_t> indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (const auto i : indices) out.push_back(values[i]);
  return out;
}

}  // namespace flowsift
