#include "flowsift/forest.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "flowsift/error.hpp"
#include "flowsift/random.hpp"

namespace flowsift {

void ForestConfig::validate() const {
  if (n_trees < 1) throw ConfigError("forest needs at least one tree");
  tree.validate();
  if (max_features && *max_features < 1) throw ConfigError("max_features must be >= 1");
}

std::size_t default_max_features(std::size_t d) {
  auto m = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d))));
  while ((m + 1) * (m + 1) <= d) ++m;
  while (m * m > d) --m;
  return std::max<std::size_t>(m, 1);
}

double ForestModel::predict_proba(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& tree : trees) sum += tree.predict_proba(x);
  return sum / static_cast<double>(trees.size());
}

double ForestModel::vote_fraction(std::span<const double> x) const {
  std::size_t votes = 0;
  for (const auto& tree : trees) votes += tree.predict_proba(x) >= 0.5 ? 1 : 0;
  return static_cast<double>(votes) / static_cast<double>(trees.size());
}

ClassLabel ForestModel::predict_vote(std::span<const double> x) const {
  return vote_fraction(x) >= 0.5 ? ClassLabel::Botnet : ClassLabel::Benign;
}

ForestModel train_forest(const FeatureMatrix& x, std::span<const ClassLabel> y,
                         const ForestConfig& config, std::uint64_t seed) {
  config.validate();
  if (x.rows == 0) throw FitError("forest training set is empty");
  const TreeTrainingSet data(x, y);
  const std::size_t d = x.cols;
  const std::size_t m = std::min(config.max_features.value_or(default_max_features(d)), d);

  ForestModel forest;
  forest.seed = seed;
  forest.feature_subsample = m;
  forest.trees.resize(config.n_trees);

  auto grow = [&](std::size_t k) {
    std::vector<std::uint32_t> weights;
    if (config.bootstrap) {
      weights.assign(data.rows(), 0);
      Rng rng(derive_seed(seed, SeedPurpose::Bootstrap, k));
      for (std::size_t i = 0; i < data.rows(); ++i) ++weights[rng.below(data.rows())];
    }
    FeatureSubsampler sampler(m, derive_seed(seed, SeedPurpose::FeatureSubset, k));
    forest.trees[k] = train_tree(data, config.tree, &sampler, weights);
  };

  std::size_t threads = config.threads == 0 ? std::thread::hardware_concurrency() : config.threads;
  threads = std::clamp<std::size_t>(threads, 1, config.n_trees);
  if (threads == 1) {
    for (std::size_t k = 0; k < config.n_trees; ++k) grow(k);
    return forest;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t k = next++; k < config.n_trees; k = next++) {
        try {
          grow(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
  return forest;
}

}  // namespace flowsift
