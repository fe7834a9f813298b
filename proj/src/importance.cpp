#include "flowsift/importance.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "flowsift/error.hpp"
#include "flowsift/metrics.hpp"
#include "flowsift/model.hpp"
#include "flowsift/random.hpp"

namespace flowsift {
namespace {

std::vector<double> score_rows(const RowScorer& scorer, const FeatureMatrix& m) {
  std::vector<double> scores(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) scores[i] = scorer(m.row(i));
  return scores;
}

}  // namespace

ImportanceReport permutation_importance(const RowScorer& scorer, const FeatureMatrix& test,
                                        std::span<const ClassLabel> labels,
                                        std::span<const std::string> feature_names,
                                        std::size_t repeats, std::uint64_t seed,
                                        std::size_t threads) {
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (feature_names.size() != test.cols) throw SchemaError("feature name count mismatch");
  if (labels.size() != test.rows) throw MetricError("labels and rows differ in length");

  ImportanceReport report;
  report.repeats = repeats;
  report.seed = seed;
  report.baseline_pr_auc = average_precision(score_rows(scorer, test), labels);
  report.features.resize(test.cols);

  auto run_feature = [&](std::size_t j) {
    FeatureMatrix shuffled = test;
    std::vector<double> column(test.rows);
    auto& entry = report.features[j];
    entry.index = j;
    entry.feature = feature_names[j];
    for (std::size_t r = 0; r < repeats; ++r) {
      for (std::size_t i = 0; i < test.rows; ++i) column[i] = test.at(i, j);
      Rng rng(derive_seed(seed, SeedPurpose::Permutation, j * 1'000'003ULL + r));
      rng.shuffle(std::span<double>(column));
      for (std::size_t i = 0; i < test.rows; ++i) shuffled.at(i, j) = column[i];
      entry.drops.push_back(report.baseline_pr_auc -
                            average_precision(score_rows(scorer, shuffled), labels));
    }
    const double n = static_cast<double>(repeats);
    entry.mean_drop = std::accumulate(entry.drops.begin(), entry.drops.end(), 0.0) / n;
    if (repeats > 1) {
      double sq = 0.0;
      for (const double d : entry.drops) sq += (d - entry.mean_drop) * (d - entry.mean_drop);
      entry.std_drop = std::sqrt(sq / (n - 1.0));
    }
  };

  std::size_t workers = threads == 0 ? std::thread::hardware_concurrency() : threads;
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(test.cols, 1));
  if (workers == 1) {
    for (std::size_t j = 0; j < test.cols; ++j) run_feature(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < workers; ++t)
        pool.emplace_back([&] {
          for (std::size_t j = next++; j < test.cols; j = next++) {
            try {
              run_feature(j);
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
            }
          }
        });
    }
    if (failure) std::rethrow_exception(failure);
  }

  std::stable_sort(report.features.begin(), report.features.end(),
                   [](const FeatureImportance& a, const FeatureImportance& b) {
                     return a.mean_drop > b.mean_drop;
                   });
  return report;
}

ImportanceReport permutation_importance(const TrainedModel& model, const FeatureMatrix& test,
                                        std::span<const ClassLabel> labels, std::size_t repeats,
                                        std::uint64_t seed, std::size_t threads) {
  if (test.cols != model.schema.size()) throw SchemaError("test matrix width does not match model");
  RowScorer scorer = [&model](std::span<const double> x) { return model.score(x); };
  return permutation_importance(scorer, test, labels, model.schema.feature_names, repeats, seed,
                                threads);
}

}  // namespace flowsift
