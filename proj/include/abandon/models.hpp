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

// Classifiers: L1 logistic regression, random forest, gradient-boosted trees,
// and the three reference baselines.

#ifndef ABANDON_MODELS_HPP_
#define ABANDON_MODELS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "abandon/cart.hpp"
#include "abandon/error.hpp"
#include "abandon/matrix.hpp"
#include "abandon/random.hpp"
#include "json.hpp"

namespace abandon {

enum class ModelKind { logreg_l1, random_forest, gbdt };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::logreg_l1: return "lr";
    case ModelKind::random_forest: return "rf";
    case ModelKind::gbdt: return "gbdt";
  }
  return "unknown";
}

inline std::optional<ModelKind> model_kind_from_string(std::string_view s) {
  if (s == "lr" || s == "logreg_l1") return ModelKind::logreg_l1;
  if (s == "rf" || s == "random_forest") return ModelKind::random_forest;
  if (s == "gbdt") return ModelKind::gbdt;
  return std::nullopt;
}

struct TrainConfig {
  ModelKind kind = ModelKind::gbdt;

  // Logistic regression. An empty grid trains at `lambda` directly; a
  // non-empty grid is searched by cross-validation during evaluation.
  double lambda = 0.01;
  std::vector<double> lambda_grid;

  // Trees.
  int n_trees = 100;
  int max_depth = 2;
  int min_leaf = 1;
  double learning_rate = 0.3;
  double reg_lambda = 1.0;
  double gamma = 0.0;
  int feature_subset_size = 0;  // 0 = ceil(sqrt(d)) for RF
  bool bootstrap = true;

  // Multiplier on positive-row loss; unset = negatives / positives.
  std::optional<double> positive_weight;

  std::uint64_t seed = 42;
  double tolerance = 1e-12;
  int max_iterations = 20000;

  void validate() const {
    if (!(lambda >= 0.0)) throw Error("lambda must be >= 0");
    for (double l : lambda_grid)
      if (!(l >= 0.0)) throw Error("lambda grid values must be >= 0");
    if (n_trees < 1) throw Error("n_trees must be >= 1");
    if (max_depth < 0) throw Error("max_depth must be >= 0");
    if (min_leaf < 1) throw Error("min_leaf must be >= 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
      throw Error("learning_rate must lie in (0, 1]");
    if (!(reg_lambda >= 0.0)) throw Error("reg_lambda must be >= 0");
    if (!(gamma >= 0.0)) throw Error("gamma must be >= 0");
    if (feature_subset_size < 0) throw Error("feature_subset_size must be >= 0");
    if (positive_weight && !(*positive_weight > 0.0))
      throw Error("positive_weight must be > 0");
    if (!(tolerance > 0.0)) throw Error("tolerance must be > 0");
    if (max_iterations < 1) throw Error("max_iterations must be >= 1");
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

inline TrainConfig default_train_config(ModelKind kind) {
  TrainConfig c;
  c.kind = kind;
  switch (kind) {
    case ModelKind::gbdt:
      c.n_trees = 100;
      c.max_depth = 2;
      c.learning_rate = 0.3;
      c.reg_lambda = 1.0;
      c.gamma = 0.0;
      break;
    case ModelKind::random_forest:
      c.n_trees = 200;
      c.max_depth = 25;
      c.min_leaf = 1;
      c.bootstrap = true;
      break;
    case ModelKind::logreg_l1:
      c.lambda_grid = {1e-4, 1e-3, 1e-2, 1e-1};
      break;
  }
  return c;
}

struct FitInfo {
  int iterations = 0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  bool converged = true;
  std::vector<double> loss_trace;  // GBDT: training logloss after each round
  std::vector<std::string> warnings;

  friend bool operator==(const FitInfo&, const FitInfo&) = default;
};

struct LinearModel {
  std::vector<std::string> feature_names;
  std::vector<double> weights;
  double intercept = 0.0;
  double lambda = 0.0;
  double positive_weight = 1.0;
  FitInfo info;

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

enum class EnsembleKind { random_forest, gbdt };

struct TreeEnsembleModel {
  EnsembleKind kind = EnsembleKind::gbdt;
  std::vector<Tree> trees;
  double base_score = 0.0;
  double learning_rate = 1.0;
  std::vector<std::string> feature_names;
  FitInfo info;

  friend bool operator==(const TreeEnsembleModel&, const TreeEnsembleModel&) = default;
};

enum class BaselineKind { label_distribution_random, always_abandon, never_abandon };

inline std::string_view to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::label_distribution_random: return "bl1";
    case BaselineKind::always_abandon: return "bl2";
    case BaselineKind::never_abandon: return "bl3";
  }
  return "unknown";
}

struct BaselineModel {
  BaselineKind kind = BaselineKind::label_distribution_random;
  double positive_rate = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const BaselineModel&, const BaselineModel&) = default;
};

using Model = std::variant<LinearModel, TreeEnsembleModel, BaselineModel>;

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline constexpr double kProbabilityClamp = 1e-6;

inline double clamp_probability(double p) {
  return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

inline double resolve_positive_weight(const TrainConfig& config, std::span<const int> labels) {
  if (config.positive_weight) return *config.positive_weight;
  const auto pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0.0 || neg == 0.0) return 1.0;
  return neg / pos;
}

inline std::vector<double> row_weights(std::span<const int> labels, double positive_weight) {
  std::vector<double> w(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) w[i] = labels[i] == 1 ? positive_weight : 1.0;
  return w;
}

// Weighted mean logloss with probabilities clamped to [1e-6, 1 - 1e-6].
inline double mean_logloss(std::span<const int> labels, std::span<const double> probs,
                           std::span<const double> weights = {}) {
  double sum = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    const double p = clamp_probability(probs[i]);
    sum += w * (labels[i] == 1 ? -std::log(p) : -std::log(1.0 - p));
    wsum += w;
  }
  return wsum > 0 ? sum / wsum : 0.0;
}

namespace detail {

inline void check_training_data(const Matrix& x, std::span<const int> labels,
                                std::span<const std::string> names) {
  if (x.rows() == 0) throw Error("cannot train on zero rows");
  if (labels.size() != x.rows()) throw Error("label count does not match rows");
  if (names.size() != x.cols()) throw Error("feature name count does not match columns");
  for (int y : labels)
    if (y != 0 && y != 1) throw Error("labels must be 0 or 1");
  for (double v : x.data())
    if (!std::isfinite(v)) throw Error("training matrix contains non-finite values");
}

inline void check_row(std::span<const double> row, std::size_t expected) {
  if (row.size() != expected)
    throw Error("row has " + std::to_string(row.size()) + " features, model expects " +
                std::to_string(expected));
}

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// Smooth part of the logistic objective: weighted mean logloss of
// z = X w + b.
struct LogisticLoss {
  const Matrix& x;
  std::span<const int> y;
  std::span<const double> w;
  double wsum;

  void margins(std::span<const double> beta, double b, std::vector<double>& z) const {
    const std::size_t n = x.rows(), d = x.cols();
    z.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = x.row(i);
      double s = b;
      for (std::size_t j = 0; j < d; ++j) s += row[j] * beta[j];
      z[i] = s;
    }
  }

  double value(std::span<const double> z) const {
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) s += w[i] * (softplus(z[i]) - y[i] * z[i]);
    return s / wsum;
  }

  void gradient(std::span<const double> z, std::vector<double>& g_beta, double& g_b) const {
    const std::size_t n = x.rows(), d = x.cols();
    g_beta.assign(d, 0.0);
    g_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = w[i] * (sigmoid(z[i]) - y[i]);
      const auto row = x.row(i);
      for (std::size_t j = 0; j < d; ++j) g_beta[j] += r * row[j];
      g_b += r;
    }
    for (auto& g : g_beta) g /= wsum;
    g_b /= wsum;
  }
};

inline double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace detail

// Largest KKT violation of the L1 logistic objective at (weights, intercept),
// given the smooth-loss gradient there.
inline double kkt_residual(std::span<const double> weights, std::span<const double> grad_w,
                           double grad_b, double lambda) {
  double r = std::abs(grad_b);
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] == 0.0) {
      r = std::max(r, std::abs(grad_w[j]) - lambda);
    } else {
      r = std::max(r, std::abs(grad_w[j] + lambda * (weights[j] > 0 ? 1.0 : -1.0)));
    }
  }
  return std::max(r, 0.0);
}

// Minimizes weighted mean logloss + lambda * |w|_1 (intercept unpenalized)
// with accelerated proximal gradient, backtracking line search, and a
// monotone restart. Stops when an accepted step lowers the objective by less
// than config.tolerance.
inline LinearModel fit_logreg_l1(const Matrix& x, std::span<const int> labels,
                                 const TrainConfig& config,
                                 std::vector<std::string> feature_names,
                                 std::optional<double> lambda_override = std::nullopt) {
  config.validate();
  detail::check_training_data(x, labels, feature_names);
  const std::size_t d = x.cols();
  const double lambda = lambda_override.value_or(config.lambda);
  const double pos_w = resolve_positive_weight(config, labels);
  const auto w = row_weights(labels, pos_w);
  double wsum = 0.0, wpos = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    wsum += w[i];
    if (labels[i] == 1) wpos += w[i];
  }
  const detail::LogisticLoss loss{x, labels, w, wsum};

  std::vector<double> beta(d, 0.0), beta_prev(d, 0.0), beta_y(d, 0.0), beta_new(d, 0.0);
  const double base_rate = std::clamp(wpos / wsum, 1e-12, 1.0 - 1e-12);
  double b = logit(base_rate), b_prev = b, b_y = b, b_new = b;
  std::vector<double> z, z_prev, z_y, z_new, g;
  double gb = 0.0;
  loss.margins(beta, b, z);
  z_prev = z;
  double objective = loss.value(z) + lambda * detail::l1_norm(beta);
  double theta = 1.0;
  double momentum = 0.0;
  double step = 1.0;

  LinearModel model;
  model.lambda = lambda;
  model.positive_weight = pos_w;
  bool converged = false;
  int it = 0;
  for (; it < config.max_iterations; ++it) {
    // Momentum point; margins are linear in the parameters.
    const double mom = momentum;
    for (std::size_t j = 0; j < d; ++j) beta_y[j] = beta[j] + mom * (beta[j] - beta_prev[j]);
    b_y = b + mom * (b - b_prev);
    z_y.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) z_y[i] = z[i] + mom * (z[i] - z_prev[i]);
    const double f_y = loss.value(z_y);
    loss.gradient(z_y, g, gb);

    double f_new = 0.0;
    while (true) {
      for (std::size_t j = 0; j < d; ++j)
        beta_new[j] = detail::soft_threshold(beta_y[j] - step * g[j], step * lambda);
      b_new = b_y - step * gb;
      loss.margins(beta_new, b_new, z_new);
      f_new = loss.value(z_new);
      double lin = gb * (b_new - b_y), quad = (b_new - b_y) * (b_new - b_y);
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = beta_new[j] - beta_y[j];
        lin += g[j] * diff;
        quad += diff * diff;
      }
      if (f_new <= f_y + lin + quad / (2.0 * step) + 1e-15 * std::abs(f_y)) break;
      step *= 0.5;
      if (step < 1e-20) break;
    }
    const double obj_new = f_new + lambda * detail::l1_norm(beta_new);
    if (obj_new > objective && mom != 0.0) {
      // Momentum overshot: restart from the current iterate.
      theta = 1.0;
      momentum = 0.0;
      beta_prev = beta;
      b_prev = b;
      z_prev = z;
      continue;
    }
    const double decrease = objective - obj_new;
    beta_prev.swap(beta);
    beta.swap(beta_new);
    b_prev = b;
    b = b_new;
    z_prev.swap(z);
    z.swap(z_new);
    objective = obj_new;
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    momentum = (theta - 1.0) / theta_next;
    theta = theta_next;
    if (decrease < config.tolerance) {
      converged = true;
      ++it;
      break;
    }
  }

  loss.gradient(z, g, gb);
  model.feature_names = std::move(feature_names);
  model.weights = beta;
  model.intercept = b;
  model.info.iterations = it;
  model.info.objective = objective;
  model.info.kkt_residual = kkt_residual(beta, g, gb, lambda);
  model.info.converged = converged;
  if (!converged)
    model.info.warnings.push_back("logistic regression hit max_iterations without converging");
  return model;
}

inline double predict_linear(const LinearModel& model, std::span<const double> row) {
  detail::check_row(row, model.weights.size());
  double z = model.intercept;
  for (std::size_t j = 0; j < row.size(); ++j) z += model.weights[j] * row[j];
  return sigmoid(z);
}

// Bootstrap-aggregated Gini trees with per-node feature subsampling.
inline TreeEnsembleModel fit_random_forest(const Matrix& x, std::span<const int> labels,
                                           const TrainConfig& config,
                                           std::vector<std::string> feature_names) {
  config.validate();
  detail::check_training_data(x, labels, feature_names);
  const std::size_t n = x.rows(), d = x.cols();
  const auto weights = row_weights(labels, resolve_positive_weight(config, labels));
  ClassificationTreeParams params;
  params.max_depth = config.max_depth;
  params.min_leaf = config.min_leaf;
  params.feature_subset_size =
      config.feature_subset_size > 0
          ? config.feature_subset_size
          : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));

  TreeEnsembleModel model;
  model.kind = EnsembleKind::random_forest;
  model.base_score = 0.0;
  model.learning_rate = 1.0;
  model.feature_names = feature_names;
  std::vector<std::size_t> rows;
  for (int t = 0; t < config.n_trees; ++t) {
    Rng rng = make_rng(config.seed, {static_cast<std::uint64_t>(t)});
    if (config.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      rows.resize(n);
      for (auto& r : rows) r = pick(rng);
    } else {
      rows = detail::all_rows(n);
    }
    model.trees.push_back(
        fit_classification_tree(x, labels, rows, weights, params, rng, feature_names));
  }
  model.info.iterations = config.n_trees;
  return model;
}

// Second-order boosting of logistic loss: each round fits a regression tree
// to per-row (gradient, hessian) and adds it scaled by the learning rate.
inline TreeEnsembleModel fit_gbdt(const Matrix& x, std::span<const int> labels,
                                  const TrainConfig& config,
                                  std::vector<std::string> feature_names) {
  config.validate();
  detail::check_training_data(x, labels, feature_names);
  const std::size_t n = x.rows();
  const auto w = row_weights(labels, resolve_positive_weight(config, labels));
  double wsum = 0.0, wpos = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    wsum += w[i];
    if (labels[i] == 1) wpos += w[i];
  }
  const double mean = wpos / wsum;
  double base = 0.0;
  if (mean <= 0.0) {
    base = -10.0;
  } else if (mean >= 1.0) {
    base = 10.0;
  } else {
    base = std::clamp(logit(mean), -10.0, 10.0);
  }

  TreeEnsembleModel model;
  model.kind = EnsembleKind::gbdt;
  model.base_score = base;
  model.learning_rate = config.learning_rate;
  model.feature_names = feature_names;

  RegressionTreeParams params;
  params.max_depth = config.max_depth;
  params.min_leaf = config.min_leaf;
  params.reg_lambda = config.reg_lambda;
  params.gamma = config.gamma;

  std::vector<double> raw(n, base), p(n), grad(n), hess(n);
  auto probs = [&] {
    for (std::size_t i = 0; i < n; ++i) p[i] = sigmoid(raw[i]);
  };
  probs();
  model.info.loss_trace.push_back(mean_logloss(labels, p, w));
  const auto rows = detail::all_rows(n);
  for (int round = 0; round < config.n_trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] = w[i] * (p[i] - labels[i]);
      hess[i] = w[i] * p[i] * (1.0 - p[i]);
    }
    Tree tree = fit_regression_tree(x, grad, hess, rows, params, feature_names);
    for (std::size_t i = 0; i < n; ++i)
      raw[i] += config.learning_rate * predict_tree(tree, x.row(i));
    model.trees.push_back(std::move(tree));
    probs();
    model.info.loss_trace.push_back(mean_logloss(labels, p, w));
  }
  model.info.iterations = config.n_trees;
  model.info.objective = model.info.loss_trace.back();
  return model;
}

inline double raw_score(const TreeEnsembleModel& model, std::span<const double> row) {
  detail::check_row(row, model.feature_names.size());
  double s = 0.0;
  for (const auto& t : model.trees) s += predict_tree(t, row);
  return model.base_score + model.learning_rate * s;
}

inline double predict_ensemble(const TreeEnsembleModel& model, std::span<const double> row) {
  detail::check_row(row, model.feature_names.size());
  if (model.kind == EnsembleKind::gbdt) return sigmoid(raw_score(model, row));
  if (model.trees.empty()) throw Error("random forest has no trees");
  double s = 0.0;
  for (const auto& t : model.trees) s += predict_tree(t, row);
  return clamp_probability(s / static_cast<double>(model.trees.size()));
}

inline BaselineModel fit_baseline(std::span<const int> labels, BaselineKind kind,
                                  std::uint64_t seed) {
  BaselineModel m;
  m.kind = kind;
  m.seed = seed;
  if (!labels.empty())
    m.positive_rate = static_cast<double>(std::count(labels.begin(), labels.end(), 1)) /
                      static_cast<double>(labels.size());
  return m;
}

inline std::vector<int> predict_baseline(const BaselineModel& model, std::size_t row_count) {
  std::vector<int> out(row_count, 0);
  switch (model.kind) {
    case BaselineKind::always_abandon:
      std::fill(out.begin(), out.end(), 1);
      break;
    case BaselineKind::never_abandon:
      break;
    case BaselineKind::label_distribution_random: {
      Rng rng = make_rng(model.seed, {0xb1});
      std::bernoulli_distribution draw(std::clamp(model.positive_rate, 0.0, 1.0));
      for (auto& v : out) v = draw(rng) ? 1 : 0;
      break;
    }
  }
  return out;
}

inline std::vector<int> classify(std::span<const double> probabilities, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error("threshold must lie in (0, 1)");
  std::vector<int> out(probabilities.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = probabilities[i] >= threshold ? 1 : 0;
  return out;
}

inline const std::vector<std::string>& model_features(const Model& model) {
  static const std::vector<std::string> none;
  if (const auto* l = std::get_if<LinearModel>(&model)) return l->feature_names;
  if (const auto* e = std::get_if<TreeEnsembleModel>(&model)) return e->feature_names;
  return none;
}

inline std::string model_kind_name(const Model& model) {
  if (std::holds_alternative<LinearModel>(model)) return "logreg_l1";
  if (const auto* e = std::get_if<TreeEnsembleModel>(&model))
    return e->kind == EnsembleKind::gbdt ? "gbdt" : "random_forest";
  return std::string(to_string(std::get<BaselineModel>(model).kind));
}

// Scores every row of x. Baselines return their 0/1 predictions as scores.
inline std::vector<double> predict_scores(const Model& model, const Matrix& x) {
  std::vector<double> out(x.rows());
  if (const auto* l = std::get_if<LinearModel>(&model)) {
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict_linear(*l, x.row(i));
  } else if (const auto* e = std::get_if<TreeEnsembleModel>(&model)) {
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict_ensemble(*e, x.row(i));
  } else {
    const auto preds = predict_baseline(std::get<BaselineModel>(model), x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = preds[i];
  }
  return out;
}

// ---- Serialization -------------------------------------------------------

inline nlohmann::ordered_json train_config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(c.kind));
  j["lambda"] = c.lambda;
  j["lambda_grid"] = c.lambda_grid;
  j["n_trees"] = c.n_trees;
  j["max_depth"] = c.max_depth;
  j["min_leaf"] = c.min_leaf;
  j["learning_rate"] = c.learning_rate;
  j["reg_lambda"] = c.reg_lambda;
  j["gamma"] = c.gamma;
  j["feature_subset_size"] = c.feature_subset_size;
  j["bootstrap"] = c.bootstrap;
  j["positive_weight"] = c.positive_weight ? nlohmann::ordered_json(*c.positive_weight)
                                           : nlohmann::ordered_json(nullptr);
  j["seed"] = c.seed;
  j["tolerance"] = c.tolerance;
  j["max_iterations"] = c.max_iterations;
  return j;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  auto kind = model_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw Error("unknown model kind in config");
  c.kind = *kind;
  c.lambda = j.at("lambda").get<double>();
  c.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
  c.n_trees = j.at("n_trees").get<int>();
  c.max_depth = j.at("max_depth").get<int>();
  c.min_leaf = j.at("min_leaf").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.reg_lambda = j.at("reg_lambda").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.feature_subset_size = j.at("feature_subset_size").get<int>();
  c.bootstrap = j.at("bootstrap").get<bool>();
  if (!j.at("positive_weight").is_null()) c.positive_weight = j.at("positive_weight").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.tolerance = j.at("tolerance").get<double>();
  c.max_iterations = j.at("max_iterations").get<int>();
  return c;
}

namespace detail {

inline nlohmann::ordered_json fit_info_to_json(const FitInfo& info) {
  return {{"iterations", info.iterations},     {"objective", info.objective},
          {"kkt_residual", info.kkt_residual}, {"converged", info.converged},
          {"loss_trace", info.loss_trace},     {"warnings", info.warnings}};
}

inline FitInfo fit_info_from_json(const nlohmann::json& j) {
  FitInfo info;
  info.iterations = j.at("iterations").get<int>();
  info.objective = j.at("objective").get<double>();
  info.kkt_residual = j.at("kkt_residual").get<double>();
  info.converged = j.at("converged").get<bool>();
  info.loss_trace = j.at("loss_trace").get<std::vector<double>>();
  info.warnings = j.at("warnings").get<std::vector<std::string>>();
  return info;
}

}  // namespace detail

// Model envelope: {kind, config, feature_order, base_score, learning_rate,
// trees | weights, metadata}.
inline nlohmann::ordered_json model_to_json(const Model& model,
                                            const std::optional<TrainConfig>& config = std::nullopt) {
  nlohmann::ordered_json j;
  j["kind"] = model_kind_name(model);
  j["config"] = config ? train_config_to_json(*config) : nlohmann::ordered_json(nullptr);
  j["feature_order"] = model_features(model);
  if (const auto* l = std::get_if<LinearModel>(&model)) {
    j["base_score"] = 0.0;
    j["learning_rate"] = nullptr;
    j["weights"] = l->weights;
    j["intercept"] = l->intercept;
    j["lambda"] = l->lambda;
    j["positive_weight"] = l->positive_weight;
    j["metadata"] = detail::fit_info_to_json(l->info);
  } else if (const auto* e = std::get_if<TreeEnsembleModel>(&model)) {
    j["base_score"] = e->base_score;
    j["learning_rate"] = e->learning_rate;
    auto trees = nlohmann::ordered_json::array();
    for (const auto& t : e->trees) trees.push_back(tree_to_json(t));
    j["trees"] = std::move(trees);
    j["metadata"] = detail::fit_info_to_json(e->info);
  } else {
    const auto& b = std::get<BaselineModel>(model);
    j["base_score"] = 0.0;
    j["learning_rate"] = nullptr;
    j["positive_rate"] = b.positive_rate;
    j["seed"] = b.seed;
    j["metadata"] = nlohmann::ordered_json::object();
  }
  return j;
}

struct ModelEnvelope {
  Model model;
  std::optional<TrainConfig> config;
};

inline ModelEnvelope model_from_json(const nlohmann::json& j) {
  ModelEnvelope env;
  const auto kind = j.at("kind").get<std::string>();
  if (!j.at("config").is_null()) env.config = train_config_from_json(j.at("config"));
  const auto features = j.at("feature_order").get<std::vector<std::string>>();
  if (kind == "logreg_l1") {
    LinearModel l;
    l.feature_names = features;
    l.weights = j.at("weights").get<std::vector<double>>();
    if (l.weights.size() != features.size()) throw Error("weight count does not match features");
    l.intercept = j.at("intercept").get<double>();
    l.lambda = j.at("lambda").get<double>();
    l.positive_weight = j.at("positive_weight").get<double>();
    l.info = detail::fit_info_from_json(j.at("metadata"));
    env.model = std::move(l);
  } else if (kind == "gbdt" || kind == "random_forest") {
    TreeEnsembleModel e;
    e.kind = kind == "gbdt" ? EnsembleKind::gbdt : EnsembleKind::random_forest;
    e.feature_names = features;
    e.base_score = j.at("base_score").get<double>();
    e.learning_rate = j.at("learning_rate").get<double>();
    for (const auto& t : j.at("trees")) e.trees.push_back(tree_from_json(t, features));
    e.info = detail::fit_info_from_json(j.at("metadata"));
    env.model = std::move(e);
  } else if (kind == "bl1" || kind == "bl2" || kind == "bl3") {
    BaselineModel b;
    b.kind = kind == "bl1"   ? BaselineKind::label_distribution_random
             : kind == "bl2" ? BaselineKind::always_abandon
                             : BaselineKind::never_abandon;
    b.positive_rate = j.at("positive_rate").get<double>();
    b.seed = j.at("seed").get<std::uint64_t>();
    env.model = b;
  } else {
    throw Error("unknown model kind '" + kind + "'");
  }
  return env;
}

}  // namespace abandon

#endif  // ABANDON_MODELS_HPP_
