#include "flowsift/tree.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "flowsift/error.hpp"

namespace flowsift {
namespace {

using u128 = unsigned __int128;

// Minimizing the weighted Gini of a split is the same as maximizing
// S = (pL^2 + nL^2)/cL + (pR^2 + nR^2)/cR, since n*weighted_gini = n - S.
// S is kept as an exact fraction so comparisons never depend on rounding.
struct SplitScore {
  u128 num = 0;
  u128 den = 1;

  bool beats(const SplitScore& other) const { return num * other.den > other.num * den; }
};

SplitScore split_score(std::uint64_t pl, std::uint64_t nl, std::uint64_t pr, std::uint64_t nr) {
  const u128 cl = pl + nl;
  const u128 cr = pr + nr;
  const u128 a = u128{pl} * pl + u128{nl} * nl;
  const u128 b = u128{pr} * pr + u128{nr} * nr;
  return {a * cr + b * cl, cl * cr};
}

SplitScore parent_score(std::uint64_t pos, std::uint64_t neg) {
  return {u128{pos} * pos + u128{neg} * neg, u128{pos} + neg};
}

double weighted_gini_of(const SplitScore& s, std::uint64_t total) {
  return 1.0 - static_cast<double>(s.num) / (static_cast<double>(s.den) * static_cast<double>(total));
}

struct BestSplit {
  SplitScore score;
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t left_entries = 0;
  bool found = false;
};

class TreeBuilder {
 public:
  TreeBuilder(const TreeTrainingSet& data, const TreeConfig& config, FeatureSubsampler* sampler,
              std::span<const std::uint32_t> weights)
      : data_(data), config_(config), sampler_(sampler), weights_(weights) {
    const std::size_t d = data.cols();
    order_.resize(d);
    for (std::size_t f = 0; f < d; ++f) {
      const auto sorted = data.sorted(f);
      auto& ord = order_[f];
      if (weights_.empty()) {
        ord.assign(sorted.begin(), sorted.end());
      } else {
        ord.reserve(sorted.size());
        for (const auto row : sorted)
          if (weights_[row] > 0) ord.push_back(row);
      }
    }
    goes_left_.assign(data.rows(), 0);
    buffer_.reserve(order_.empty() ? 0 : order_[0].size());
    all_features_.resize(d);
    std::iota(all_features_.begin(), all_features_.end(), std::size_t{0});
  }

  TreeModel build() {
    TreeModel model;
    model.n_features = data_.cols();
    if (data_.cols() == 0 || order_[0].empty()) throw FitError("tree training set is empty");
    grow(0, order_[0].size(), 0);
    model.nodes = std::move(nodes_);
    return model;
  }

 private:
  std::uint64_t weight(std::uint32_t row) const { return weights_.empty() ? 1 : weights_[row]; }

  std::uint32_t grow(std::size_t begin, std::size_t end, std::size_t depth) {
    std::uint64_t pos = 0, neg = 0;
    for (std::size_t k = begin; k < end; ++k) {
      const auto row = order_[0][k];
      (data_.positive(row) ? pos : neg) += weight(row);
    }
    const std::uint64_t total = pos + neg;
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    TreeNode leaf;
    leaf.positive_fraction = static_cast<double>(pos) / static_cast<double>(total);
    leaf.sample_count = total;
    nodes_.push_back(leaf);

    if (depth >= config_.max_depth || total < config_.min_samples_split || pos == 0 || neg == 0)
      return index;

    std::vector<std::size_t> drawn;
    if (sampler_ != nullptr) drawn = sampler_->draw(data_.cols());
    const std::vector<std::size_t>& features = sampler_ != nullptr ? drawn : all_features_;

    BestSplit best;
    for (const auto f : features) scan(f, begin, end, pos, neg, best);
    if (!best.found || !best.score.beats(parent_score(pos, neg))) return index;

    const std::size_t mid = partition(best, begin, end);
    const auto left = grow(begin, mid, depth + 1);
    const auto right = grow(mid, end, depth + 1);
    TreeNode& node = nodes_[index];
    node.feature = static_cast<std::int32_t>(best.feature);
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return index;
  }

  void scan(std::size_t f, std::size_t begin, std::size_t end, std::uint64_t pos,
            std::uint64_t neg, BestSplit& best) const {
    const auto& ord = order_[f];
    const std::uint64_t total = pos + neg;
    const std::uint64_t min_leaf = config_.min_samples_leaf;
    std::uint64_t lp = 0, ln = 0;
    double value = data_.value(f, ord[begin]);
    for (std::size_t k = begin; k + 1 < end; ++k) {
      const auto row = ord[k];
      (data_.positive(row) ? lp : ln) += weight(row);
      const double next = data_.value(f, ord[k + 1]);
      if (value < next) {
        const std::uint64_t left_count = lp + ln;
        if (total - left_count < min_leaf) break;
        if (left_count >= min_leaf) {
          const auto score = split_score(lp, ln, pos - lp, neg - ln);
          if (!best.found || score.beats(best.score)) {
            best.score = score;
            best.feature = f;
            best.threshold = std::midpoint(value, next);
            best.left_entries = k + 1 - begin;
            best.found = true;
          }
        }
      }
      value = next;
    }
  }

  // Stable partition of every feature's range so that each child again owns a
  // contiguous, sorted range. Returns the split point.
  std::size_t partition(const BestSplit& best, std::size_t begin, std::size_t end) {
    const std::size_t mid = begin + best.left_entries;
    const auto& split_order = order_[best.feature];
    for (std::size_t k = begin; k < end; ++k) goes_left_[split_order[k]] = k < mid ? 1 : 0;
    for (std::size_t f = 0; f < order_.size(); ++f) {
      if (f == best.feature) continue;
      auto& ord = order_[f];
      buffer_.clear();
      std::size_t write = begin;
      for (std::size_t k = begin; k < end; ++k) {
        const auto row = ord[k];
        if (goes_left_[row]) {
          ord[write++] = row;
        } else {
          buffer_.push_back(row);
        }
      }
      std::copy(buffer_.begin(), buffer_.end(), ord.begin() + static_cast<std::ptrdiff_t>(write));
    }
    return mid;
  }

  const TreeTrainingSet& data_;
  const TreeConfig& config_;
  FeatureSubsampler* sampler_;
  std::span<const std::uint32_t> weights_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> buffer_;
  std::vector<std::size_t> all_features_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

void TreeConfig::validate() const {
  if (max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (min_samples_split < 1) throw ConfigError("min_samples_split must be >= 1");
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
}

const TreeNode& TreeModel::leaf_for(std::span<const double> x) const {
  if (x.size() != n_features) throw SchemaError("feature vector length mismatch");
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf())
    node = &nodes[x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left
                                                                                 : node->right];
  return *node;
}

double TreeModel::predict_proba(std::span<const double> x) const {
  return leaf_for(x).positive_fraction;
}

std::size_t TreeModel::depth() const {
  if (nodes.empty()) return 0;
  std::size_t deepest = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [index, depth] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, depth);
    const auto& node = nodes[index];
    if (!node.is_leaf()) {
      stack.emplace_back(node.left, depth + 1);
      stack.emplace_back(node.right, depth + 1);
    }
  }
  return deepest;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double gini(std::uint64_t pos, std::uint64_t neg) {
  const std::uint64_t total = pos + neg;
  if (total == 0) throw std::domain_error("gini of an empty node");
  const double p = static_cast<double>(pos) / static_cast<double>(total);
  const double q = static_cast<double>(neg) / static_cast<double>(total);
  return 1.0 - p * p - q * q;
}

std::optional<SplitCandidate> best_split(const FeatureMatrix& x, std::span<const ClassLabel> y,
                                         std::span<const std::size_t> rows,
                                         std::span<const std::size_t> candidate_features,
                                         std::size_t min_samples_leaf) {
  std::uint64_t pos = 0;
  for (const auto r : rows) pos += y[r] == ClassLabel::Botnet ? 1 : 0;
  const std::uint64_t total = rows.size();
  const std::uint64_t neg = total - pos;
  if (total == 0) return std::nullopt;

  std::vector<std::size_t> features(candidate_features.begin(), candidate_features.end());
  std::sort(features.begin(), features.end());
  features.erase(std::unique(features.begin(), features.end()), features.end());

  std::vector<std::pair<double, bool>> column(rows.size());
  BestSplit best;
  for (const auto f : features) {
    for (std::size_t k = 0; k < rows.size(); ++k)
      column[k] = {x.at(rows[k], f), y[rows[k]] == ClassLabel::Botnet};
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::uint64_t lp = 0, ln = 0;
    for (std::size_t k = 0; k + 1 < column.size(); ++k) {
      (column[k].second ? lp : ln) += 1;
      if (!(column[k].first < column[k + 1].first)) continue;
      const std::uint64_t left_count = lp + ln;
      if (left_count < min_samples_leaf || total - left_count < min_samples_leaf) continue;
      const auto score = split_score(lp, ln, pos - lp, neg - ln);
      if (!best.found || score.beats(best.score)) {
        best.score = score;
        best.feature = f;
        best.threshold = std::midpoint(column[k].first, column[k + 1].first);
        best.found = true;
      }
    }
  }
  if (!best.found || !best.score.beats(parent_score(pos, neg))) return std::nullopt;
  return SplitCandidate{best.feature, best.threshold, weighted_gini_of(best.score, total)};
}

std::vector<std::size_t> FeatureSubsampler::draw(std::size_t d) {
  const std::size_t k = std::min(m_, d);
  std::vector<std::size_t> pool(d);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng_.below(d - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

TreeTrainingSet::TreeTrainingSet(const FeatureMatrix& x, std::span<const ClassLabel> y)
    : n_(x.rows), d_(x.cols) {
  if (y.size() != n_) throw ConfigError("label count does not match feature rows");
  columns_.resize(n_ * d_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t f = 0; f < d_; ++f) columns_[f * n_ + i] = x.at(i, f);
  labels_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) labels_[i] = y[i] == ClassLabel::Botnet ? 1 : 0;
  sorted_.resize(n_ * d_);
  for (std::size_t f = 0; f < d_; ++f) {
    auto first = sorted_.begin() + static_cast<std::ptrdiff_t>(f * n_);
    auto last = first + static_cast<std::ptrdiff_t>(n_);
    std::iota(first, last, std::uint32_t{0});
    const double* col = columns_.data() + f * n_;
    std::stable_sort(first, last, [col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
  }
}

TreeModel train_tree(const TreeTrainingSet& data, const TreeConfig& config,
                     FeatureSubsampler* sampler, std::span<const std::uint32_t> weights) {
  config.validate();
  if (!weights.empty() && weights.size() != data.rows())
    throw ConfigError("weight count does not match training rows");
  return TreeBuilder(data, config, sampler, weights).build();
}

TreeModel train_tree(const FeatureMatrix& x, std::span<const ClassLabel> y,
                     const TreeConfig& config) {
  return train_tree(TreeTrainingSet(x, y), config);
}

}  // namespace flowsift
