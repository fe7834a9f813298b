#include "flowsift/pipeline.hpp"

#include <chrono>

#include "flowsift/error.hpp"
#include "flowsift/random.hpp"

namespace flowsift {

Dataset load_dataset(std::span<const std::filesystem::path> paths, const ColumnMapping& mapping) {
  Dataset data;
  for (const auto& path : paths) {
    auto reader = FlowReader::open(path, mapping);
    while (auto record = reader.next()) {
      data.flows.push_back(std::move(record->flow));
      data.labels.push_back(*record->label);
    }
    const auto& s = reader.stats();
    data.stats.rows_read += s.rows_read;
    data.stats.rows_kept += s.rows_kept;
    data.stats.rows_dropped += s.rows_dropped;
    for (const auto& [reason, count] : s.drop_reasons) data.stats.drop_reasons[reason] += count;
  }
  return data;
}

Dataset dataset_from(std::span<const SynthFlow> flows) {
  Dataset data;
  data.flows.reserve(flows.size());
  data.labels.reserve(flows.size());
  for (const auto& f : flows) {
    data.flows.push_back(f.flow);
    data.labels.push_back(f.label);
  }
  data.stats.rows_read = data.stats.rows_kept = flows.size();
  return data;
}

TrainedModel fit_model(std::span<const RawFlow> flows, std::span<const ClassLabel> labels,
                       const PipelineConfig& config) {
  TrainedModel model;
  model.schema = fit_schema(flows);
  auto x = extract_matrix(flows, model.schema);
  switch (config.kind) {
    case ModelKind::Logistic: {
      model.standardizer = fit_standardizer(x, default_scaled_mask());
      model.standardizer->apply_inplace(x);
      model.classifier = train_logistic(x, labels, config.logistic, config.seed);
      break;
    }
    case ModelKind::Tree:
      model.classifier = train_tree(x, labels, config.tree);
      break;
    case ModelKind::Forest: {
      ForestConfig forest = config.forest;
      forest.tree = config.tree;
      model.classifier = train_forest(x, labels, forest, config.seed);
      break;
    }
  }
  return model;
}

TrainResult train_pipeline(const Dataset& data, const PipelineConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  TrainResult result;
  result.split = stratified_split(data.labels, config.split);
  auto train_flows = gather<RawFlow>(data.flows, result.split.train);
  auto train_labels = gather<ClassLabel>(data.labels, result.split.train);

  if (config.tune_on == TuneOn::Validation) {
    // Hold out part of the training split, choose T there, then refit on all
    // of the training split.
    SplitSpec inner{1.0 - config.validation_fraction,
                    derive_seed(config.split.seed, SeedPurpose::Validation)};
    const auto holdout = stratified_split(train_labels, inner);
    const auto fit_flows = gather<RawFlow>(train_flows, holdout.train);
    const auto fit_labels = gather<ClassLabel>(train_labels, holdout.train);
    const auto provisional = fit_model(fit_flows, fit_labels, config);
    const auto val_flows = gather<RawFlow>(train_flows, holdout.test);
    const auto val_labels = gather<ClassLabel>(train_labels, holdout.test);
    const auto val_scores = provisional.score_all(extract_matrix(val_flows, provisional.schema));
    result.validation_threshold = threshold_sweep(val_scores, val_labels).best.threshold;
  }

  result.model = fit_model(train_flows, train_labels, config);
  result.model.tuned_threshold = result.validation_threshold;
  result.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

Evaluation evaluate_model(const TrainedModel& model, std::span<const RawFlow> flows,
                          std::span<const ClassLabel> labels,
                          std::optional<double> tuned_threshold) {
  Evaluation out;
  out.scores = model.score_all(extract_matrix(flows, model.schema));
  out.pr = pr_curve(out.scores, labels);
  out.roc = roc_curve(out.scores, labels);
  out.sweep = threshold_sweep(out.scores, labels);
  out.report = evaluate(out.scores, labels, tuned_threshold.value_or(out.sweep.best.threshold));
  return out;
}

}  // namespace flowsift
