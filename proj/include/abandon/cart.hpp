/*
 * Copyright 2026 The Abandon Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Binary decision trees shared by the random forest (Gini splits, leaf =
// positive-class fraction) and gradient boosting (second-order gain, leaf =
// Newton step). Split search is exact greedy over presorted columns.

#ifndef ABANDON_CART_HPP_
#define ABANDON_CART_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "abandon/error.hpp"
#include "abandon/matrix.hpp"
#include "abandon/random.hpp"
#include "json.hpp"

namespace abandon {

// Internal nodes route a row left iff row[feature] < threshold.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  double gain = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// nodes[0] is the root; nodes are stored in preorder.
struct Tree {
  std::vector<TreeNode> nodes;
  int depth = 0;
  std::vector<std::string> feature_names;

  const TreeNode& root() const { return nodes.front(); }
  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(
        nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
  }

  friend bool operator==(const Tree&, const Tree&) = default;
};

struct ClassificationTreeParams {
  int max_depth = 25;
  int min_leaf = 1;
  int feature_subset_size = 0;  // 0 = consider every feature
};

struct RegressionTreeParams {
  int max_depth = 2;
  int min_leaf = 1;
  double reg_lambda = 1.0;
  double gamma = 0.0;
};

namespace detail {

struct GiniStat {
  double pos = 0.0;
  double total = 0.0;
  GiniStat& operator+=(const GiniStat& o) {
    pos += o.pos;
    total += o.total;
    return *this;
  }
  friend GiniStat operator-(GiniStat a, const GiniStat& b) {
    a.pos -= b.pos;
    a.total -= b.total;
    return a;
  }
};

class GiniCriterion {
 public:
  using Stat = GiniStat;

  GiniCriterion(std::span<const int> labels, std::span<const double> weights)
      : labels_(labels), weights_(weights) {}

  Stat stat(std::size_t row) const {
    const double w = weights_.empty() ? 1.0 : weights_[row];
    return {labels_[row] == 1 ? w : 0.0, w};
  }
  double leaf_value(const Stat& s) const { return s.total > 0 ? s.pos / s.total : 0.0; }
  bool pure(const Stat& s) const { return s.pos <= 0.0 || s.pos >= s.total; }
  // Weighted Gini impurity decrease.
  double gain(const Stat& parent, const Stat& left, const Stat& right) const {
    return impurity(parent) - impurity(left) - impurity(right);
  }
  bool accept(double gain, const Stat& parent) const {
    return gain > 1e-12 * std::max(1.0, parent.total);
  }

 private:
  static double impurity(const Stat& s) {
    return s.total > 0 ? 2.0 * s.pos * (s.total - s.pos) / s.total : 0.0;
  }

  std::span<const int> labels_;
  std::span<const double> weights_;
};

struct NewtonStat {
  double g = 0.0;
  double h = 0.0;
  NewtonStat& operator+=(const NewtonStat& o) {
    g += o.g;
    h += o.h;
    return *this;
  }
  friend NewtonStat operator-(NewtonStat a, const NewtonStat& b) {
    a.g -= b.g;
    a.h -= b.h;
    return a;
  }
};

class NewtonCriterion {
 public:
  using Stat = NewtonStat;

  NewtonCriterion(std::span<const double> grad, std::span<const double> hess, double lambda,
                  double gamma)
      : grad_(grad), hess_(hess), lambda_(lambda), gamma_(gamma) {}

  Stat stat(std::size_t row) const { return {grad_[row], hess_[row]}; }
  double leaf_value(const Stat& s) const {
    const double denom = s.h + lambda_;
    return denom > 0 ? -s.g / denom : 0.0;
  }
  bool pure(const Stat&) const { return false; }
  // 1/2 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)] - gamma
  double gain(const Stat& parent, const Stat& left, const Stat& right) const {
    return 0.5 * (score(left) + score(right) - score(parent)) - gamma_;
  }
  bool accept(double gain, const Stat&) const { return gain > 0.0; }

 private:
  double score(const Stat& s) const {
    const double denom = s.h + lambda_;
    return denom > 0 ? s.g * s.g / denom : 0.0;
  }

  std::span<const double> grad_;
  std::span<const double> hess_;
  double lambda_;
  double gamma_;
};

template <class Criterion>
class TreeBuilder {
 public:
  using Stat = typename Criterion::Stat;

  // sample_rows maps sample position -> matrix row; rows may repeat
  // (bootstrap). subset_size 0 considers all features at every node.
  TreeBuilder(const Matrix& x, std::span<const std::size_t> sample_rows,
              const Criterion& criterion, int max_depth, int min_leaf, int subset_size,
              Rng* rng)
      : x_(x),
        rows_(sample_rows),
        criterion_(criterion),
        max_depth_(max_depth),
        min_leaf_(std::max(1, min_leaf)),
        subset_size_(subset_size),
        rng_(rng) {}

  Tree build(std::vector<std::string> feature_names) {
    if (rows_.empty()) throw Error("cannot fit a tree on zero rows");
    const std::size_t d = x_.cols();
    const std::size_t m = rows_.size();
    order_.assign(m, 0);
    std::iota(order_.begin(), order_.end(), std::uint32_t{0});
    sorted_.assign(d, {});
    for (std::size_t f = 0; f < d; ++f) {
      auto& s = sorted_[f];
      s = order_;
      std::stable_sort(s.begin(), s.end(), [&](std::uint32_t a, std::uint32_t b) {
        return x_(rows_[a], f) < x_(rows_[b], f);
      });
    }
    goes_left_.assign(m, 0);
    nodes_.clear();
    depth_ = 0;
    grow(0, m, 0);
    Tree tree;
    tree.nodes = std::move(nodes_);
    tree.depth = depth_;
    tree.feature_names = std::move(feature_names);
    return tree;
  }

 private:
  struct Split {
    double gain = -std::numeric_limits<double>::infinity();
    int feature = -1;
    double threshold = 0.0;
    std::size_t left_count = 0;
  };

  static bool better(const Split& a, const Split& b) {
    if (a.gain != b.gain) return a.gain > b.gain;
    if (a.feature != b.feature) return a.feature < b.feature;
    return a.threshold < b.threshold;
  }

  void scan_feature(std::size_t f, std::size_t begin, std::size_t end, const Stat& total,
                    Split& best) const {
    const auto& s = sorted_[f];
    const std::size_t n = end - begin;
    Stat left{};
    for (std::size_t i = begin; i + 1 < end; ++i) {
      left += criterion_.stat(rows_[s[i]]);
      const double v = x_(rows_[s[i]], f);
      const double next = x_(rows_[s[i + 1]], f);
      if (v == next) continue;
      const std::size_t n_left = i - begin + 1;
      if (n_left < static_cast<std::size_t>(min_leaf_) ||
          n - n_left < static_cast<std::size_t>(min_leaf_))
        continue;
      const double gain = criterion_.gain(total, left, total - left);
      double threshold = 0.5 * (v + next);
      if (!(threshold > v)) threshold = next;
      Split cand{gain, static_cast<int>(f), threshold, n_left};
      if (better(cand, best)) best = cand;
    }
  }

  int grow(std::size_t begin, std::size_t end, int depth) {
    Stat total{};
    for (std::size_t i = begin; i < end; ++i) total += criterion_.stat(rows_[order_[i]]);
    const int id = static_cast<int>(nodes_.size());
    TreeNode leaf;
    leaf.value = criterion_.leaf_value(total);
    nodes_.push_back(leaf);
    depth_ = std::max(depth_, depth);

    const std::size_t n = end - begin;
    if (depth >= max_depth_ || n < 2 * static_cast<std::size_t>(min_leaf_) ||
        criterion_.pure(total))
      return id;

    const std::size_t d = x_.cols();
    Split best;
    if (subset_size_ > 0 && static_cast<std::size_t>(subset_size_) < d && rng_ != nullptr) {
      // Random feature order; look past the first subset_size features only
      // when none of them yields a usable split.
      std::vector<std::size_t> features(d);
      std::iota(features.begin(), features.end(), std::size_t{0});
      std::shuffle(features.begin(), features.end(), *rng_);
      for (std::size_t i = 0; i < d; ++i) {
        if (i >= static_cast<std::size_t>(subset_size_) && best.feature >= 0 &&
            criterion_.accept(best.gain, total))
          break;
        scan_feature(features[i], begin, end, total, best);
      }
    } else {
      for (std::size_t f = 0; f < d; ++f) scan_feature(f, begin, end, total, best);
    }
    if (best.feature < 0 || !criterion_.accept(best.gain, total)) return id;

    const auto f = static_cast<std::size_t>(best.feature);
    for (std::size_t i = begin; i < end; ++i) {
      const auto sample = order_[i];
      goes_left_[sample] = x_(rows_[sample], f) < best.threshold;
    }
    const auto is_left = [&](std::uint32_t sample) { return goes_left_[sample] != 0; };
    std::stable_partition(order_.begin() + begin, order_.begin() + end, is_left);
    for (auto& s : sorted_)
      std::stable_partition(s.begin() + begin, s.begin() + end, is_left);

    const std::size_t mid = begin + best.left_count;
    const int left = grow(begin, mid, depth + 1);
    const int right = grow(mid, end, depth + 1);
    auto& node = nodes_[id];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.gain = best.gain;
    node.value = 0.0;
    node.left = left;
    node.right = right;
    return id;
  }

  const Matrix& x_;
  std::span<const std::size_t> rows_;
  Criterion criterion_;
  int max_depth_;
  int min_leaf_;
  int subset_size_;
  Rng* rng_;

  std::vector<std::uint32_t> order_;  // node samples in sample order
  std::vector<std::vector<std::uint32_t>> sorted_;
  std::vector<char> goes_left_;
  std::vector<TreeNode> nodes_;
  int depth_ = 0;
};

inline std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

inline void check_fit_inputs(const Matrix& x, std::span<const std::string> names) {
  if (names.size() != x.cols()) throw Error("feature name count does not match matrix columns");
  for (double v : x.data())
    if (!std::isfinite(v)) throw Error("tree fitting requires a complete, finite matrix");
}

}  // namespace detail

// Greedy Gini tree. sample_rows lists the training rows (repeats allowed);
// weights, when non-empty, are per matrix row.
inline Tree fit_classification_tree(const Matrix& x, std::span<const int> labels,
                                    std::span<const std::size_t> sample_rows,
                                    std::span<const double> weights,
                                    const ClassificationTreeParams& params, Rng& rng,
                                    std::vector<std::string> feature_names) {
  detail::check_fit_inputs(x, feature_names);
  if (labels.size() != x.rows()) throw Error("label count does not match rows");
  for (int y : labels)
    if (y != 0 && y != 1) throw Error("labels must be 0 or 1");
  detail::GiniCriterion criterion(labels, weights);
  detail::TreeBuilder<detail::GiniCriterion> builder(x, sample_rows, criterion, params.max_depth,
                                                     params.min_leaf,
                                                     params.feature_subset_size, &rng);
  return builder.build(std::move(feature_names));
}

inline Tree fit_classification_tree(const Matrix& x, std::span<const int> labels,
                                    const ClassificationTreeParams& params, Rng& rng,
                                    std::vector<std::string> feature_names) {
  const auto rows = detail::all_rows(x.rows());
  return fit_classification_tree(x, labels, rows, {}, params, rng, std::move(feature_names));
}

// Second-order regression tree on per-row gradients and hessians. Each
// internal node records its split gain.
inline Tree fit_regression_tree(const Matrix& x, std::span<const double> grad,
                                std::span<const double> hess,
                                std::span<const std::size_t> sample_rows,
                                const RegressionTreeParams& params,
                                std::vector<std::string> feature_names) {
  detail::check_fit_inputs(x, feature_names);
  if (grad.size() != x.rows() || hess.size() != x.rows())
    throw Error("gradient/hessian length does not match rows");
  for (double h : hess)
    if (!(h >= 0.0)) throw Error("hessians must be nonnegative");
  detail::NewtonCriterion criterion(grad, hess, params.reg_lambda, params.gamma);
  detail::TreeBuilder<detail::NewtonCriterion> builder(x, sample_rows, criterion,
                                                       params.max_depth, params.min_leaf, 0,
                                                       nullptr);
  return builder.build(std::move(feature_names));
}

inline Tree fit_regression_tree(const Matrix& x, std::span<const double> grad,
                                std::span<const double> hess, const RegressionTreeParams& params,
                                std::vector<std::string> feature_names) {
  const auto rows = detail::all_rows(x.rows());
  return fit_regression_tree(x, grad, hess, rows, params, std::move(feature_names));
}

inline double predict_tree(const Tree& tree, std::span<const double> row) {
  if (row.size() != tree.feature_names.size())
    throw Error("row has " + std::to_string(row.size()) + " features, tree expects " +
                std::to_string(tree.feature_names.size()));
  const TreeNode* node = &tree.nodes.front();
  while (!node->is_leaf()) {
    const double v = row[static_cast<std::size_t>(node->feature)];
    if (std::isnan(v))
      throw Error("missing value for feature '" + tree.feature_names[node->feature] + "'");
    node = &tree.nodes[v < node->threshold ? node->left : node->right];
  }
  return node->value;
}

namespace detail {

inline nlohmann::ordered_json node_to_json(const Tree& tree, int id) {
  const auto& n = tree.nodes[static_cast<std::size_t>(id)];
  if (n.is_leaf()) return {{"leaf", n.value}};
  return {{"feature", tree.feature_names[static_cast<std::size_t>(n.feature)]},
          {"threshold", n.threshold},
          {"gain", n.gain},
          {"left", node_to_json(tree, n.left)},
          {"right", node_to_json(tree, n.right)}};
}

inline int node_from_json(const nlohmann::json& j, Tree& tree, int depth) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  tree.depth = std::max(tree.depth, depth);
  if (j.contains("leaf")) {
    tree.nodes[id].value = j.at("leaf").get<double>();
    return id;
  }
  const auto name = j.at("feature").get<std::string>();
  auto it = std::find(tree.feature_names.begin(), tree.feature_names.end(), name);
  if (it == tree.feature_names.end()) throw Error("tree references unknown feature '" + name + "'");
  const int left = node_from_json(j.at("left"), tree, depth + 1);
  const int right = node_from_json(j.at("right"), tree, depth + 1);
  auto& n = tree.nodes[id];
  n.feature = static_cast<int>(it - tree.feature_names.begin());
  n.threshold = j.at("threshold").get<double>();
  n.gain = j.at("gain").get<double>();
  n.left = left;
  n.right = right;
  return id;
}

}  // namespace detail

// Nested {feature, threshold, gain, left, right} / {leaf} nodes.
inline nlohmann::ordered_json tree_to_json(const Tree& tree) {
  return detail::node_to_json(tree, 0);
}

inline Tree tree_from_json(const nlohmann::json& j, std::vector<std::string> feature_names) {
  Tree tree;
  tree.feature_names = std::move(feature_names);
  detail::node_from_json(j, tree, 0);
  return tree;
}

}  // namespace abandon

#endif  // ABANDON_CART_HPP_
