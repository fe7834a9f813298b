#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "flowsift/features.hpp"
#include "flowsift/forest.hpp"
#include "flowsift/logistic.hpp"
#include "flowsift/tree.hpp"

namespace flowsift {

enum class ModelKind { Logistic, Tree, Forest };

/// "lr", "dt", "rf".
std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view token);

/// Only the logistic pipeline standardizes its inputs.
constexpr bool uses_standardizer(ModelKind kind) { return kind == ModelKind::Logistic; }

/// Decision rule: Botnet iff score >= threshold.
constexpr ClassLabel classify(double score, double threshold) {
  return score >= threshold ? ClassLabel::Botnet : ClassLabel::Benign;
}

using Classifier = std::variant<LogisticModel, TreeModel, ForestModel>;

/// A classifier together with the encoder state that produced its inputs.
struct TrainedModel {
  FeatureSchema schema;
  std::optional<Standardizer> standardizer;
  Classifier classifier;
  /// Best-F1 threshold chosen on a validation slice at training time, if any.
  std::optional<double> tuned_threshold;

  ModelKind kind() const;
  /// Scores an unscaled feature vector; the standardizer is applied here.
  double score(std::span<const double> features) const;
  std::vector<double> score_all(const FeatureMatrix& features) const;
  double score_flow(const RawFlow& flow) const;
};

inline constexpr std::string_view kModelMagic = "flowsift-model";
inline constexpr int kModelFormatVersion = 1;

/// Versioned JSON document. Output is deterministic for a given model.
std::string save_model(const TrainedModel& model);
/// Throws ModelFormatError on corrupt payloads, wrong magic or version.
TrainedModel load_model(std::string_view bytes);

void save_model_file(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model_file(const std::filesystem::path& path);

}  // namespace flowsift
