#include "flowsift/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "flowsift/error.hpp"
#include "flowsift/random.hpp"

namespace flowsift {
namespace {

// log(1 + e^z) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double dot(std::span<const double> w, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
  return s;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void LogisticConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(l2 >= 0.0)) throw ConfigError("l2 must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

double LogisticModel::predict_proba(std::span<const double> x) const {
  if (x.size() != weights.size()) throw SchemaError("feature vector length mismatch");
  return sigmoid(dot(weights, x) + bias);
}

LogLossGradient logistic_objective(const LogisticModel& model, const FeatureMatrix& x,
                                   std::span<const ClassLabel> y,
                                   std::span<const std::size_t> rows, double l2,
                                   double positive_weight) {
  const std::size_t d = model.weights.size();
  LogLossGradient out;
  out.grad_weights.assign(d, 0.0);
  if (rows.empty()) return out;
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (const auto i : rows) {
    const auto xi = x.row(i);
    const double z = dot(model.weights, xi) + model.bias;
    const bool positive = y[i] == ClassLabel::Botnet;
    const double weight = positive ? positive_weight : 1.0;
    // -[y log s + (1-y) log(1-s)] = softplus(z) - y z
    out.loss += weight * (softplus(z) - (positive ? z : 0.0));
    const double residual = weight * (sigmoid(z) - (positive ? 1.0 : 0.0));
    for (std::size_t j = 0; j < d; ++j) out.grad_weights[j] += residual * xi[j];
    out.grad_bias += residual;
  }
  out.loss *= inv_n;
  out.grad_bias *= inv_n;
  double norm2 = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    out.grad_weights[j] = out.grad_weights[j] * inv_n + l2 * model.weights[j];
    norm2 += model.weights[j] * model.weights[j];
  }
  out.loss += 0.5 * l2 * norm2;
  return out;
}

LogisticModel train_logistic(const FeatureMatrix& x, std::span<const ClassLabel> y,
                             const LogisticConfig& config, std::uint64_t seed) {
  config.validate();
  if (x.rows == 0 || x.rows != y.size()) throw FitError("logistic training set is empty");
  const auto positives =
      static_cast<std::size_t>(std::count(y.begin(), y.end(), ClassLabel::Botnet));
  if (positives == 0 || positives == y.size())
    throw FitError("logistic training set contains a single class");
  const double positive_weight =
      config.class_weighting
          ? static_cast<double>(y.size() - positives) / static_cast<double>(positives)
          : 1.0;

  LogisticModel model;
  model.weights.assign(x.cols, 0.0);
  std::vector<std::size_t> order(x.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, SeedPurpose::LogisticShuffle));

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const auto stop = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, stop - start);
      const auto g = logistic_objective(model, x, y, batch, config.l2, positive_weight);
      if (!std::isfinite(g.loss))
        throw DivergenceError("logistic loss became non-finite in epoch " +
                              std::to_string(epoch + 1));
      epoch_loss += g.loss * static_cast<double>(batch.size());
      for (std::size_t j = 0; j < x.cols; ++j)
        model.weights[j] -= config.learning_rate * g.grad_weights[j];
      model.bias -= config.learning_rate * g.grad_bias;
    }
    const bool finite = std::isfinite(model.bias) &&
                        std::all_of(model.weights.begin(), model.weights.end(),
                                    [](double w) { return std::isfinite(w); });
    if (!std::isfinite(epoch_loss) || !finite)
      throw DivergenceError("logistic training diverged in epoch " + std::to_string(epoch + 1));
  }
  return model;
}

}  // namespace flowsift
