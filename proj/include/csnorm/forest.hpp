#pragma once

// Binary random forest: bootstrap-sampled CART trees with Gini splits over a
// random feature subset per node. Leaves hold the positive fraction, and
// the forest probability is the mean leaf value.
//
// All randomness of tree t is derived from seed + t, so the thread count never
// changes the result.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "csnorm/binary_io.hpp"
#include "csnorm/error.hpp"
#include "csnorm/parallel.hpp"
#include "csnorm/rng.hpp"

namespace csnorm {

// Row-major instance matrix with 0/1 labels.
struct ForestData {
  std::size_t n_features = 0;
  std::vector<double> x;
  std::vector<std::uint8_t> y;

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * n_features, n_features}; }
  void add(std::span<const double> features, bool label) {
    if (n_features == 0 && y.empty()) n_features = features.size();
    if (features.size() != n_features) throw InvalidArgument("feature vector length mismatch");
    x.insert(x.end(), features.begin(), features.end());
    y.push_back(label ? 1 : 0);
  }
};

struct ForestConfig {
  std::size_t n_trees = 200;
  int max_depth = -1;  // -1: unlimited
  std::size_t min_leaf = 5;
  std::size_t max_features = 0;  // 0: ceil(sqrt(F))
  std::uint64_t seed = 42;
  bool bootstrap = true;
  std::size_t threads = 0;  // 0: hardware concurrency

  bool operator==(const ForestConfig&) const = default;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // go left when x <= threshold
  std::uint32_t left = 0, right = 0;
  double value = 0.0;  // positive fraction at this node

  bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw InvalidArgument("tree without nodes");
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }

  double predict(std::span<const double> x) const {
    std::uint32_t i = 0;
    while (nodes_[i].feature >= 0) {
      const auto& n = nodes_[i];
      i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[i].value;
  }

  std::size_t depth() const { return depth_from(0); }

  bool operator==(const DecisionTree&) const = default;

private:
  std::size_t depth_from(std::uint32_t i) const {
    const auto& n = nodes_[i];
    if (n.feature < 0) return 0;
    return 1 + std::max(depth_from(n.left), depth_from(n.right));
  }

  std::vector<TreeNode> nodes_;
};

namespace detail {

// In-bag multiplicity per instance for tree `t`.
inline std::vector<std::uint32_t> bootstrap_counts(std::size_t n, std::uint64_t seed, std::size_t t, bool bootstrap) {
  std::vector<std::uint32_t> counts(n, bootstrap ? 0 : 1);
  if (!bootstrap) return counts;
  Rng rng(seed + t);
  for (std::size_t i = 0; i < n; ++i) ++counts[rng.below(n)];
  return counts;
}

class TreeBuilder {
public:
  TreeBuilder(const ForestData& data, const ForestConfig& cfg, std::size_t mtry, std::uint64_t tree_seed)
      : data_(data), cfg_(cfg), mtry_(mtry), rng_(tree_seed) {}

  DecisionTree build(const std::vector<std::uint32_t>& counts) {
    std::vector<std::uint32_t> idx;
    for (std::size_t i = 0; i < counts.size(); ++i)
      for (std::uint32_t c = 0; c < counts[i]; ++c) idx.push_back(static_cast<std::uint32_t>(i));
    grow(idx, 0);
    return DecisionTree(std::move(nodes_));
  }

private:
  struct Split {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity();
  };

  static double gini(double pos, double n) {
    if (n <= 0) return 0.0;
    const double p = pos / n;
    return 2.0 * p * (1.0 - p);
  }

  std::uint32_t grow(std::vector<std::uint32_t>& idx, int depth) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    double pos = 0;
    for (auto i : idx) pos += data_.y[i];
    const double n = static_cast<double>(idx.size());
    nodes_[id].value = n > 0 ? pos / n : 0.0;

    const bool pure = pos == 0 || pos == n;
    if (pure || (cfg_.max_depth >= 0 && depth >= cfg_.max_depth) || idx.size() < 2 * cfg_.min_leaf) return id;

    Split best = find_split(idx, pos);
    if (best.feature < 0 || !(best.impurity < gini(pos, n))) return id;

    std::vector<std::uint32_t> left, right;
    for (auto i : idx) {
      if (data_.x[i * data_.n_features + static_cast<std::size_t>(best.feature)] <= best.threshold) left.push_back(i);
      else right.push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    nodes_[id].feature = best.feature;
    nodes_[id].threshold = best.threshold;
    const auto l = grow(left, depth + 1);
    const auto r = grow(right, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  std::vector<std::size_t> sample_features() {
    std::vector<std::size_t> f(data_.n_features);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = i;
    // partial Fisher-Yates
    for (std::size_t i = 0; i < mtry_; ++i) std::swap(f[i], f[i + rng_.below(f.size() - i)]);
    f.resize(mtry_);
    return f;
  }

  Split find_split(const std::vector<std::uint32_t>& idx, double pos_total) {
    Split best;
    const double n = static_cast<double>(idx.size());
    std::vector<std::pair<double, std::uint8_t>> col(idx.size());
    for (auto f : sample_features()) {
      for (std::size_t k = 0; k < idx.size(); ++k)
        col[k] = {data_.x[idx[k] * data_.n_features + f], data_.y[idx[k]]};
      std::sort(col.begin(), col.end());
      if (col.front().first == col.back().first) continue;
      double pos_left = 0;
      for (std::size_t k = 0; k + 1 < col.size(); ++k) {
        pos_left += col[k].second;
        if (col[k].first == col[k + 1].first) continue;
        const double nl = static_cast<double>(k + 1), nr = n - nl;
        if (nl < static_cast<double>(cfg_.min_leaf) || nr < static_cast<double>(cfg_.min_leaf)) continue;
        const double imp = (nl * gini(pos_left, nl) + nr * gini(pos_total - pos_left, nr)) / n;
        if (imp < best.impurity) {
          double thr = col[k].first + (col[k + 1].first - col[k].first) / 2.0;
          if (!(thr < col[k + 1].first) || !std::isfinite(thr)) thr = col[k].first;
          best = {static_cast<std::int32_t>(f), thr, imp};
        }
      }
    }
    return best;
  }

  const ForestData& data_;
  const ForestConfig& cfg_;
  std::size_t mtry_;
  Rng rng_;
  std::vector<TreeNode> nodes_;
};

}  // namespace detail

class RandomForest {
public:
  RandomForest() = default;
  RandomForest(std::size_t n_features, ForestConfig cfg, std::vector<DecisionTree> trees)
      : n_features_(n_features), cfg_(cfg), trees_(std::move(trees)) {
    cfg_.threads = 0;
  }

  std::size_t n_features() const { return n_features_; }
  const ForestConfig& config() const { return cfg_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

  double predict_proba(std::span<const double> x) const {
    if (trees_.empty()) throw InvalidArgument("empty forest");
    if (x.size() != n_features_)
      throw InvalidArgument("feature vector has " + std::to_string(x.size()) + " values, forest expects " +
                            std::to_string(n_features_));
    double sum = 0;
    for (const auto& t : trees_) sum += t.predict(x);
    return sum / static_cast<double>(trees_.size());
  }

  // Accuracy (threshold 0.5) of each instance voted on only by trees that did
  // not see it. Bootstrap draws are replayed from the seed, so `data` must be
  // the training set. Instances in every bag are skipped.
  double oob_accuracy(const ForestData& data) const {
    if (data.n_features != n_features_) throw InvalidArgument("data/forest feature count mismatch");
    std::vector<double> sum(data.size(), 0.0);
    std::vector<std::uint32_t> votes(data.size(), 0);
    for (std::size_t t = 0; t < trees_.size(); ++t) {
      auto counts = detail::bootstrap_counts(data.size(), cfg_.seed, t, cfg_.bootstrap);
      for (std::size_t i = 0; i < data.size(); ++i)
        if (counts[i] == 0) {
          sum[i] += trees_[t].predict(data.row(i));
          ++votes[i];
        }
    }
    std::size_t seen = 0, correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (votes[i] == 0) continue;
      ++seen;
      if ((sum[i] / votes[i] >= 0.5) == (data.y[i] == 1)) ++correct;
    }
    if (seen == 0) throw InvalidArgument("no out-of-bag instances");
    return static_cast<double>(correct) / static_cast<double>(seen);
  }

  void save(BinaryWriter& w) const {
    w.u32(static_cast<std::uint32_t>(n_features_));
    w.u32(static_cast<std::uint32_t>(cfg_.n_trees));
    w.i32(cfg_.max_depth);
    w.u32(static_cast<std::uint32_t>(cfg_.min_leaf));
    w.u32(static_cast<std::uint32_t>(cfg_.max_features));
    w.u64(cfg_.seed);
    w.u8(cfg_.bootstrap ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(trees_.size()));
    for (const auto& t : trees_) {
      w.u32(static_cast<std::uint32_t>(t.nodes().size()));
      for (const auto& n : t.nodes()) {
        w.i32(n.feature);
        w.f64(n.threshold);
        w.u32(n.left);
        w.u32(n.right);
        w.f64(n.value);
      }
    }
  }

  static RandomForest load(BinaryReader& r) {
    RandomForest f;
    f.n_features_ = r.u32();
    f.cfg_.n_trees = r.u32();
    f.cfg_.max_depth = r.i32();
    f.cfg_.min_leaf = r.u32();
    f.cfg_.max_features = r.u32();
    f.cfg_.seed = r.u64();
    f.cfg_.bootstrap = r.u8() != 0;
    f.cfg_.threads = 0;
    const auto n_trees = r.u32();
    for (std::uint32_t t = 0; t < n_trees; ++t) {
      const auto n_nodes = r.u32();
      if (n_nodes == 0) throw IntegrityError("tree without nodes");
      std::vector<TreeNode> nodes(n_nodes);
      for (auto& n : nodes) {
        n.feature = r.i32();
        n.threshold = r.f64();
        n.left = r.u32();
        n.right = r.u32();
        n.value = r.f64();
        if (n.feature >= static_cast<std::int32_t>(f.n_features_)) throw IntegrityError("split feature out of range");
        if (n.feature >= 0 && (n.left >= n_nodes || n.right >= n_nodes || !std::isfinite(n.threshold)))
          throw IntegrityError("malformed tree node");
        if (!(n.value >= 0.0 && n.value <= 1.0)) throw IntegrityError("leaf value outside [0,1]");
      }
      f.trees_.emplace_back(std::move(nodes));
    }
    return f;
  }

  std::string serialize() const {
    BinaryWriter w;
    save(w);
    return w.bytes();
  }

  bool operator==(const RandomForest&) const = default;

private:
  std::size_t n_features_ = 0;
  ForestConfig cfg_;
  std::vector<DecisionTree> trees_;
};

inline std::size_t default_max_features(std::size_t n_features) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_features)))));
}

inline RandomForest train_forest(const ForestData& data, ForestConfig cfg = {}) {
  if (data.size() == 0 || data.n_features == 0) throw InvalidArgument("empty training data");
  if (data.x.size() != data.size() * data.n_features) throw InvalidArgument("malformed feature matrix");
  const auto pos = std::count(data.y.begin(), data.y.end(), 1);
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(data.size()))
    throw InvalidArgument("training data needs both positive and negative instances");
  if (cfg.n_trees == 0) throw InvalidArgument("n_trees must be positive");
  if (cfg.min_leaf == 0) throw InvalidArgument("min_leaf must be positive");
  for (double v : data.x)
    if (!std::isfinite(v)) throw InvalidArgument("non-finite feature value");

  const std::size_t mtry = cfg.max_features == 0 ? default_max_features(data.n_features)
                                                 : std::min(cfg.max_features, data.n_features);
  std::vector<DecisionTree> trees(cfg.n_trees);
  parallel_for(cfg.n_trees, cfg.threads, [&](std::size_t t) {
    auto counts = detail::bootstrap_counts(data.size(), cfg.seed, t, cfg.bootstrap);
    // Feature sampling gets its own stream so it does not depend on the
    // number of bootstrap draws.
    detail::TreeBuilder b(data, cfg, mtry, (cfg.seed + t) ^ 0x9e3779b97f4a7c15ULL);
    trees[t] = b.build(counts);
  });
  return RandomForest(data.n_features, cfg, std::move(trees));
}

inline double predict_proba(const RandomForest& f, std::span<const double> x) { return f.predict_proba(x); }

}  // namespace csnorm
