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

// Splits, cross-validation, classification metrics, and per-level model
// evaluation.

#ifndef ABANDON_EVALUATION_HPP_
#define ABANDON_EVALUATION_HPP_

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abandon/error.hpp"
#include "abandon/features.hpp"
#include "abandon/log_ingest.hpp"
#include "abandon/models.hpp"
#include "abandon/preprocess.hpp"
#include "abandon/random.hpp"
#include "abandon/text.hpp"
#include "json.hpp"

namespace abandon {

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
  std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::size_t> shuffled_range(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

inline std::size_t test_count(std::size_t n, double test_frac) {
  if (!(test_frac > 0.0 && test_frac < 1.0)) throw Error("test fraction must lie in (0, 1)");
  if (n < 5) throw Error("need at least 5 rows to split, got " + std::to_string(n));
  const auto t = static_cast<std::size_t>(std::llround(test_frac * static_cast<double>(n)));
  return std::clamp<std::size_t>(t, 1, n - 1);
}

}  // namespace detail

// Uniform random split; round(test_frac * n) rows go to the test side.
inline SplitIndices split_train_test(std::size_t n_rows, double test_frac, std::uint64_t seed) {
  const std::size_t t = detail::test_count(n_rows, test_frac);
  Rng rng = make_rng(seed, {0x5917});
  const auto idx = detail::shuffled_range(n_rows, rng);
  SplitIndices s;
  s.seed = seed;
  s.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(t));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(t), idx.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

// Per-class split, each class contributing round(test_frac * class size)
// test rows.
inline SplitIndices split_train_test_stratified(std::span<const int> labels, double test_frac,
                                                std::uint64_t seed) {
  detail::test_count(labels.size(), test_frac);
  SplitIndices s;
  s.seed = seed;
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) members.push_back(i);
    Rng rng = make_rng(seed, {0x5917, static_cast<std::uint64_t>(cls)});
    std::shuffle(members.begin(), members.end(), rng);
    const auto t = static_cast<std::size_t>(
        std::llround(test_frac * static_cast<double>(members.size())));
    s.test.insert(s.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(t));
    s.train.insert(s.train.end(), members.begin() + static_cast<std::ptrdiff_t>(t), members.end());
  }
  if (s.train.empty() || s.test.empty()) throw Error("stratified split left a side empty");
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

// Fold id in [0, k) for each of n positions; fold sizes differ by at most 1.
inline std::vector<int> kfold(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw Error("k-fold needs k >= 2");
  if (static_cast<std::size_t>(k) > n)
    throw Error("k-fold needs at least k rows (k = " + std::to_string(k) + ", rows = " +
                std::to_string(n) + ")");
  Rng rng = make_rng(seed, {0xf01d});
  const auto idx = detail::shuffled_range(n, rng);
  std::vector<int> folds(n);
  for (std::size_t i = 0; i < n; ++i) folds[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  return folds;
}

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }

  friend bool operator==(const Confusion&, const Confusion&) = default;
};

inline Confusion confusion(std::span<const int> labels, std::span<const int> predictions) {
  if (labels.size() != predictions.size()) throw Error("labels and predictions differ in length");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool y = labels[i] == 1, p = predictions[i] == 1;
    if (y && p) ++c.tp;
    else if (!y && p) ++c.fp;
    else if (!y) ++c.tn;
    else ++c.fn;
  }
  return c;
}

struct PrecisionRecallF1 {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

inline std::optional<double> f1_score(std::optional<double> precision,
                                      std::optional<double> recall) {
  if (!precision || !recall) return std::nullopt;
  const double s = *precision + *recall;
  return s == 0.0 ? 0.0 : 2.0 * *precision * *recall / s;
}

inline PrecisionRecallF1 precision_recall_f1(const Confusion& c) {
  PrecisionRecallF1 m;
  if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

inline std::optional<double> false_positive_rate(const Confusion& c) {
  if (c.fp + c.tn == 0) return std::nullopt;
  return static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
}

struct RocPoint {
  double threshold;  // +inf for the (0, 0) corner
  double fpr;
  double tpr;
};

namespace detail {

inline std::vector<std::size_t> order_by_score_desc(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

inline void check_scores(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) throw Error("labels and scores differ in length");
  for (double s : scores)
    if (std::isnan(s)) throw Error("scores contain NaN");
}

}  // namespace detail

// One point per distinct score, descending, starting at (0, 0).
inline std::vector<RocPoint> roc_curve(std::span<const int> labels, std::span<const double> scores) {
  detail::check_scores(labels, scores);
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t neg = labels.size() - pos;
  std::vector<RocPoint> out{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  if (pos == 0 || neg == 0) return out;
  const auto order = detail::order_by_score_desc(scores);
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] == 1 ? tp : fp)++;
    out.push_back({s, static_cast<double>(fp) / neg, static_cast<double>(tp) / pos});
  }
  return out;
}

// Trapezoidal area under the ROC curve. Tied scores form one segment, so the
// result equals the concordance probability with ties counted one half.
inline std::optional<double> roc_auc(std::span<const int> labels, std::span<const double> scores) {
  detail::check_scores(labels, scores);
  const auto pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0 || neg == 0) return std::nullopt;
  const auto order = detail::order_by_score_desc(scores);
  double area = 0.0, tp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    double tp_grp = 0.0, fp_grp = 0.0;
    for (; i < order.size() && scores[order[i]] == s; ++i)
      (labels[order[i]] == 1 ? tp_grp : fp_grp) += 1.0;
    area += fp_grp * (tp + 0.5 * tp_grp);
    tp += tp_grp;
  }
  return area / (pos * neg);
}

inline constexpr double kDefaultThreshold = 0.5;

// F1-maximizing threshold over the distinct scores (rule: score >= t is
// positive). Ties go to the lowest threshold. Degenerate input returns 0.5.
inline double tune_threshold(std::span<const double> scores, std::span<const int> labels) {
  detail::check_scores(labels, scores);
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (pos == 0 || pos == labels.size()) return kDefaultThreshold;
  const auto order = detail::order_by_score_desc(scores);
  std::vector<std::pair<double, double>> candidates;  // (threshold, f1)
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] == 1 ? tp : fp)++;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(pos);
    candidates.emplace_back(s, *f1_score(precision, recall));
  }
  if (candidates.size() < 2) return kDefaultThreshold;
  double best_t = 0.0, best_f1 = -1.0;
  for (const auto& [t, f] : candidates) {
    if (f > best_f1 || (f == best_f1 && t < best_t)) {
      best_f1 = f;
      best_t = t;
    }
  }
  // classify() needs an open-interval threshold.
  return std::clamp(best_t, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

struct EvaluationReport {
  int level = 0;
  std::string model;
  Confusion counts;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> fp_rate;
  std::optional<double> auc;
  double threshold = kDefaultThreshold;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t n_test_positive = 0;
  std::optional<double> lambda;  // LR only

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

inline EvaluationReport make_report(int level, std::string model, std::span<const int> labels,
                                    std::span<const int> predictions,
                                    std::span<const double> scores, double threshold,
                                    std::size_t n_train) {
  EvaluationReport r;
  r.level = level;
  r.model = std::move(model);
  r.counts = confusion(labels, predictions);
  const auto prf = precision_recall_f1(r.counts);
  r.precision = prf.precision;
  r.recall = prf.recall;
  r.f1 = prf.f1;
  r.fp_rate = false_positive_rate(r.counts);
  r.auc = roc_auc(labels, scores);
  r.threshold = threshold;
  r.n_train = n_train;
  r.n_test = labels.size();
  r.n_test_positive = r.counts.tp + r.counts.fn;
  return r;
}

// ---- Per-level pipeline ----------------------------------------------------

struct EvalConfig {
  FeatureOptions features;
  PreprocessConfig preprocess;
  std::vector<TrainConfig> models = {default_train_config(ModelKind::gbdt),
                                     default_train_config(ModelKind::random_forest),
                                     default_train_config(ModelKind::logreg_l1)};
  bool include_baselines = true;
  double test_fraction = 0.2;
  bool stratified = false;
  int cv_folds = 10;
  bool tune_threshold = false;
  double threshold = kDefaultThreshold;
  std::uint64_t seed = 42;
  // Called with the learner ids that feed every statistic or model fit;
  // stage is "preprocess" or "fit".
  std::function<void(std::string_view stage, std::span<const std::string> learner_ids)>
      fit_observer;

  void validate() const {
    preprocess.validate();
    for (const auto& m : models) m.validate();
    if (cv_folds < 2) throw Error("cv_folds must be >= 2");
    if (!(threshold > 0.0 && threshold < 1.0)) throw Error("threshold must lie in (0, 1)");
  }
};

struct PreparedLevel {
  LabeledMatrix train;
  LabeledMatrix test;
  NormalizationStats stats;
  std::vector<std::string> warnings;
};

// Drop, impute, and normalize. In train_only mode every statistic (drop
// fractions, donors, z-score moments) comes from the training rows; in
// paper_faithful_full_dataset mode the whole level is processed before
// splitting.
inline PreparedLevel prepare_level(const LabeledMatrix& raw, const SplitIndices& split,
                                   const PreprocessConfig& config,
                                   const EvalConfig* observer_source = nullptr) {
  config.validate();
  auto notify = [&](const LabeledMatrix& m) {
    if (observer_source && observer_source->fit_observer)
      observer_source->fit_observer("preprocess", m.learner_ids);
  };
  PreparedLevel out;
  if (config.normalization_mode == NormalizationMode::paper_faithful_full_dataset) {
    notify(raw);
    auto dropped = drop_high_missing(raw, config);
    auto imputed = knn_impute(dropped.matrix, config);
    out.stats = zscore_fit(imputed.matrix);
    out.stats.dropped = dropped.dropped;
    out.warnings = imputed.warnings;
    const auto normalized = zscore_apply(imputed.matrix, out.stats);
    out.train = normalized.select_rows(split.train);
    out.test = normalized.select_rows(split.test);
    return out;
  }
  const auto train_raw = raw.select_rows(split.train);
  notify(train_raw);
  auto dropped = drop_high_missing(train_raw, config);
  const auto test_raw = drop_features(raw.select_rows(split.test), dropped.dropped);
  auto train_imp = knn_impute(dropped.matrix, config);
  auto test_imp = knn_impute(test_raw, dropped.matrix, config);
  out.stats = zscore_fit(train_imp.matrix);
  out.stats.dropped = dropped.dropped;
  out.warnings = train_imp.warnings;
  for (auto& w : test_imp.warnings) out.warnings.push_back("test: " + w);
  out.train = zscore_apply(train_imp.matrix, out.stats);
  out.test = zscore_apply(test_imp.matrix, out.stats);
  return out;
}

inline std::string model_name(ModelKind kind) { return std::string(to_string(kind)); }

inline Model fit_model(const LabeledMatrix& train, const TrainConfig& config,
                       std::optional<double> lambda = std::nullopt) {
  switch (config.kind) {
    case ModelKind::logreg_l1:
      return fit_logreg_l1(train.values, train.labels, config, train.feature_names, lambda);
    case ModelKind::random_forest:
      return fit_random_forest(train.values, train.labels, config, train.feature_names);
    case ModelKind::gbdt:
      return fit_gbdt(train.values, train.labels, config, train.feature_names);
  }
  throw Error("unknown model kind");
}

struct LambdaSelection {
  double lambda = 0.0;
  std::vector<double> grid;
  std::vector<double> cv_loss;  // mean validation logloss per grid entry
};

namespace detail {

inline LabeledMatrix fold_rows(const LabeledMatrix& m, std::span<const int> folds, int fold,
                               bool in_fold) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < folds.size(); ++i)
    if ((folds[i] == fold) == in_fold) rows.push_back(i);
  return m.select_rows(rows);
}

}  // namespace detail

// Grid search over config.lambda_grid by k-fold mean validation logloss
// (class-weighted like training). Ties go to the larger lambda.
inline LambdaSelection select_lambda(const LabeledMatrix& train, const TrainConfig& config,
                                     std::span<const int> folds, int k,
                                     const EvalConfig* observer_source = nullptr) {
  LambdaSelection sel;
  sel.grid = config.lambda_grid;
  if (sel.grid.empty()) {
    sel.lambda = config.lambda;
    return sel;
  }
  std::vector<LabeledMatrix> fit_parts, val_parts;
  for (int f = 0; f < k; ++f) {
    fit_parts.push_back(detail::fold_rows(train, folds, f, false));
    val_parts.push_back(detail::fold_rows(train, folds, f, true));
  }
  for (double lambda : sel.grid) {
    double total = 0.0;
    for (int f = 0; f < k; ++f) {
      const auto& fit = fit_parts[static_cast<std::size_t>(f)];
      const auto& val = val_parts[static_cast<std::size_t>(f)];
      if (observer_source && observer_source->fit_observer)
        observer_source->fit_observer("fit", fit.learner_ids);
      const auto model = fit_logreg_l1(fit.values, fit.labels, config, fit.feature_names, lambda);
      std::vector<double> p(val.rows());
      for (std::size_t i = 0; i < val.rows(); ++i) p[i] = predict_linear(model, val.values.row(i));
      const auto w = row_weights(val.labels, resolve_positive_weight(config, fit.labels));
      total += mean_logloss(val.labels, p, w);
    }
    sel.cv_loss.push_back(total / k);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < sel.grid.size(); ++i) {
    const double a = sel.cv_loss[i], b = sel.cv_loss[best];
    if (a < b || (a == b && sel.grid[i] > sel.grid[best])) best = i;
  }
  sel.lambda = sel.grid[best];
  return sel;
}

// Out-of-fold probabilities for every training row.
inline std::vector<double> out_of_fold_scores(const LabeledMatrix& train, const TrainConfig& config,
                                              std::span<const int> folds, int k,
                                              std::optional<double> lambda,
                                              const EvalConfig* observer_source = nullptr) {
  std::vector<double> scores(train.rows(), 0.0);
  for (int f = 0; f < k; ++f) {
    const auto fit = detail::fold_rows(train, folds, f, false);
    if (observer_source && observer_source->fit_observer)
      observer_source->fit_observer("fit", fit.learner_ids);
    const auto model = fit_model(fit, config, lambda);
    const auto val = detail::fold_rows(train, folds, f, true);
    const auto val_scores = predict_scores(model, val.values);
    std::size_t next = 0;
    for (std::size_t i = 0; i < train.rows(); ++i)
      if (folds[i] == f) scores[i] = val_scores[next++];
  }
  return scores;
}

struct ModelResult {
  std::string name;
  Model model;
  std::optional<TrainConfig> config;
  std::vector<double> test_scores;
  EvaluationReport report;
};

struct LevelResult {
  int level = 0;
  SplitIndices split;
  PreparedLevel data;
  std::vector<ModelResult> models;

  std::vector<EvaluationReport> reports() const {
    std::vector<EvaluationReport> out;
    for (const auto& m : models) out.push_back(m.report);
    return out;
  }

  const ModelResult* find(std::string_view name) const {
    for (const auto& m : models)
      if (m.name == name) return &m;
    return nullptr;
  }
};

// Split, preprocess, tune, fit, and score every configured model plus the
// three baselines on one level's raw matrix.
inline LevelResult run_level(const LabeledMatrix& raw, const EvalConfig& config) {
  config.validate();
  const int level = raw.level;
  LevelResult result;
  result.level = level;
  const std::uint64_t level_seed = derive_seed(config.seed, {static_cast<std::uint64_t>(level)});
  result.split = config.stratified
                     ? split_train_test_stratified(raw.labels, config.test_fraction, level_seed)
                     : split_train_test(raw.rows(), config.test_fraction, level_seed);
  result.data = prepare_level(raw, result.split, config.preprocess, &config);
  const auto& train = result.data.train;
  const auto& test = result.data.test;
  const auto folds = kfold(train.rows(), config.cv_folds, level_seed);

  for (const auto& base_config : config.models) {
    TrainConfig tc = base_config;
    tc.seed = derive_seed(base_config.seed, {static_cast<std::uint64_t>(level)});
    ModelResult mr;
    mr.name = model_name(tc.kind);
    std::optional<double> lambda;
    if (tc.kind == ModelKind::logreg_l1) {
      lambda = select_lambda(train, tc, folds, config.cv_folds, &config).lambda;
      tc.lambda = *lambda;
    }
    double threshold = config.threshold;
    if (config.tune_threshold) {
      const auto oof = out_of_fold_scores(train, tc, folds, config.cv_folds, lambda, &config);
      threshold = tune_threshold(oof, train.labels);
    }
    if (config.fit_observer) config.fit_observer("fit", train.learner_ids);
    mr.model = fit_model(train, tc, lambda);
    mr.config = tc;
    mr.test_scores = predict_scores(mr.model, test.values);
    const auto preds = classify(mr.test_scores, threshold);
    mr.report = make_report(level, mr.name, test.labels, preds, mr.test_scores, threshold,
                            train.rows());
    mr.report.lambda = lambda;
    result.models.push_back(std::move(mr));
  }

  if (config.include_baselines) {
    const BaselineKind kinds[] = {BaselineKind::label_distribution_random,
                                  BaselineKind::always_abandon, BaselineKind::never_abandon};
    for (auto kind : kinds) {
      ModelResult mr;
      mr.name = std::string(to_string(kind));
      const auto model = fit_baseline(train.labels, kind, derive_seed(level_seed, {0xba5e}));
      mr.model = model;
      const auto preds = predict_baseline(model, test.rows());
      mr.test_scores.assign(preds.begin(), preds.end());
      mr.report = make_report(level, mr.name, test.labels, preds, mr.test_scores,
                              config.threshold, train.rows());
      result.models.push_back(std::move(mr));
    }
  }
  return result;
}

inline std::vector<EvaluationReport> evaluate_level(const GameLog& log, int level,
                                                    const EvalConfig& config) {
  return run_level(assemble_matrix(log, level, config.features), config).reports();
}

// ---- Report output ---------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline std::string cell(const std::optional<double>& v) {
  return v ? fmt::format("{:.2f}", *v) : std::string("/");
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  j["level"] = r.level;
  j["model"] = r.model;
  j["tp"] = r.counts.tp;
  j["fp"] = r.counts.fp;
  j["tn"] = r.counts.tn;
  j["fn"] = r.counts.fn;
  j["precision"] = detail::optional_json(r.precision);
  j["recall"] = detail::optional_json(r.recall);
  j["f1"] = detail::optional_json(r.f1);
  j["fp_rate"] = detail::optional_json(r.fp_rate);
  j["auc"] = detail::optional_json(r.auc);
  j["threshold"] = r.threshold;
  j["n_train"] = r.n_train;
  j["n_test"] = r.n_test;
  j["n_test_positive"] = r.n_test_positive;
  j["lambda"] = detail::optional_json(r.lambda);
  return j;
}

inline nlohmann::ordered_json reports_to_json(std::span<const EvaluationReport> reports) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(report_to_json(r));
  return arr;
}

// One block per level: model rows with AUC, precision, recall, F1, FP rate.
inline std::string reports_to_text(std::span<const EvaluationReport> reports) {
  std::string out;
  int current = std::numeric_limits<int>::min();
  for (const auto& r : reports) {
    if (r.level != current) {
      if (!out.empty()) out += '\n';
      current = r.level;
      out += fmt::format("Level {} (train {}, test {}, test positives {})\n", r.level, r.n_train,
                         r.n_test, r.n_test_positive);
      out += fmt::format("{:<8}{:>8}{:>8}{:>8}{:>8}{:>8}{:>8}\n", "model", "AUC", "Prec",
                         "Recall", "F1", "FPR", "Thr");
    }
    out += fmt::format("{:<8}{:>8}{:>8}{:>8}{:>8}{:>8}{:>8.2f}\n", r.model, detail::cell(r.auc),
                       detail::cell(r.precision), detail::cell(r.recall), detail::cell(r.f1),
                       detail::cell(r.fp_rate), r.threshold);
  }
  return out;
}

inline void write_roc_csv(std::ostream& os, int level, std::string_view model,
                          std::span<const RocPoint> points, bool header = true) {
  if (header) os << "level,model,threshold,fpr,tpr\n";
  for (const auto& p : points) {
    os << level << ',' << model << ','
       << (std::isinf(p.threshold) ? std::string("inf") : text::format_double(p.threshold)) << ','
       << text::format_double(p.fpr) << ',' << text::format_double(p.tpr) << '\n';
  }
}

}  // namespace abandon

#endif  // ABANDON_EVALUATION_HPP_
