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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "abandon/models.hpp"
#include "oracles.hpp"

namespace abandon {
namespace {

struct Dataset {
  Matrix x;
  std::vector<int> y;
  std::vector<std::string> names;
};

// Standard-normal features with logistic labels from the given weights.
Dataset logistic_data(std::size_t n, std::vector<double> w, double b, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  Dataset d;
  d.x = Matrix(0, w.size());
  for (std::size_t j = 0; j < w.size(); ++j) d.names.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(w.size());
    double z = b;
    for (std::size_t j = 0; j < w.size(); ++j) {
      row[j] = normal(gen);
      z += w[j] * row[j];
    }
    d.x.append_row(row);
    d.y.push_back(unif(gen) < oracle::logistic(z) ? 1 : 0);
  }
  return d;
}

TrainConfig lr_config(double lambda) {
  TrainConfig c = default_train_config(ModelKind::logreg_l1);
  c.lambda = lambda;
  c.lambda_grid.clear();
  return c;
}

TEST(Sigmoid, KnownValues) {
  EXPECT_DOUBLE_EQ(sigmoid(std::log(3.0)), 0.75);
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_GE(sigmoid(-800.0), 0.0);
  EXPECT_LT(sigmoid(-800.0), 1e-300);
  EXPECT_EQ(sigmoid(800.0), 1.0);
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(softplus(800.0), 800.0, 1e-9);
}

TEST(LogisticRegression, HugeLambdaGivesInterceptOnly) {
  const auto d = logistic_data(400, {1.0, -1.0, 0.5}, -1.0, 1);
  auto cfg = lr_config(1e6);
  cfg.positive_weight = 1.0;
  const auto m = fit_logreg_l1(d.x, d.y, cfg, d.names);
  for (double w : m.weights) EXPECT_EQ(w, 0.0);
  const double rate = std::accumulate(d.y.begin(), d.y.end(), 0.0) / d.y.size();
  EXPECT_NEAR(m.intercept, logit(rate), 1e-6);
}

TEST(LogisticRegression, RecoversPositiveWeightOnSeparableData) {
  Matrix x(0, 1);
  std::vector<int> y;
  for (int i = -10; i <= 10; ++i) {
    if (i == 0) continue;
    x.append_row(std::vector<double>{double(i)});
    y.push_back(i > 0 ? 1 : 0);
  }
  const auto m = fit_logreg_l1(x, y, lr_config(0.01), {"x"});
  EXPECT_GT(m.weights[0], 0.0);
  EXPECT_GT(predict_linear(m, std::vector<double>{5.0}), 0.5);
  EXPECT_LT(predict_linear(m, std::vector<double>{-5.0}), 0.5);
}

class LassoKkt : public ::testing::TestWithParam<int> {};

TEST_P(LassoKkt, FiniteDifferenceConditionsHold) {
  const auto d = logistic_data(300, {1.2, 0.0, -0.8, 0.05, 0.0}, -0.5, 100 + GetParam());
  for (double lambda : {0.001, 0.01, 0.05}) {
    const auto m = fit_logreg_l1(d.x, d.y, lr_config(lambda), d.names);
    const auto rw = row_weights(d.y, m.positive_weight);
    const auto g = oracle::finite_difference_gradient(d.x, d.y, rw, m.weights, m.intercept);
    EXPECT_LE(oracle::l1_kkt_violation(m.weights, g, lambda), 1e-4) << "lambda " << lambda;
    EXPECT_LE(m.info.kkt_residual, 1e-4);
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, LassoKkt, ::testing::Range(0, 4));

TEST(LogisticRegression, SparsityGrowsWithLambda) {
  const auto d = logistic_data(500, {1.0, 0.6, -0.4, 0.2, 0.1, 0.0}, 0.0, 7);
  std::size_t previous = d.x.cols() + 1;
  for (double lambda : {1e-4, 1e-3, 1e-2, 5e-2, 1e-1, 1.0}) {
    const auto m = fit_logreg_l1(d.x, d.y, lr_config(lambda), d.names);
    const auto nonzero = static_cast<std::size_t>(
        std::count_if(m.weights.begin(), m.weights.end(), [](double w) { return w != 0.0; }));
    EXPECT_LE(nonzero, previous) << "lambda " << lambda;
    previous = nonzero;
  }
  EXPECT_EQ(previous, 0u);
}

TEST(LogisticRegression, NegatedLabelsAndFeaturesMirror) {
  auto d = logistic_data(300, {0.8, -0.5}, 0.3, 3);
  auto cfg = lr_config(0.01);
  cfg.positive_weight = 1.0;
  const auto m = fit_logreg_l1(d.x, d.y, cfg, d.names);
  Matrix neg = d.x;
  for (std::size_t i = 0; i < neg.rows(); ++i)
    for (std::size_t j = 0; j < neg.cols(); ++j) neg(i, j) = -neg(i, j);
  const auto n = fit_logreg_l1(neg, d.y, cfg, d.names);
  for (std::size_t j = 0; j < m.weights.size(); ++j) EXPECT_NEAR(n.weights[j], -m.weights[j], 1e-5);
  EXPECT_NEAR(n.intercept, m.intercept, 1e-5);
}

TEST(LogisticRegression, UnitWeightMatchesUnweightedLoss) {
  const auto d = logistic_data(200, {0.5}, 0.0, 4);
  auto cfg = lr_config(0.0);
  cfg.positive_weight = 1.0;
  const auto m = fit_logreg_l1(d.x, d.y, cfg, d.names);
  const std::vector<double> ones(d.y.size(), 1.0);
  std::vector<double> probs;
  for (std::size_t i = 0; i < d.x.rows(); ++i) probs.push_back(predict_linear(m, d.x.row(i)));
  EXPECT_NEAR(mean_logloss(d.y, probs, ones),
              oracle::logistic_loss(d.x, d.y, ones, m.weights, m.intercept), 1e-12);
}

TEST(LogisticRegression, RejectsMisalignedInput) {
  const auto d = logistic_data(20, {0.5, 0.5}, 0.0, 4);
  std::vector<int> short_y(d.y.begin(), d.y.end() - 1);
  EXPECT_THROW(fit_logreg_l1(d.x, short_y, lr_config(0.01), d.names), Error);
  EXPECT_THROW(fit_logreg_l1(d.x, d.y, lr_config(0.01), {"only"}), Error);
  const auto m = fit_logreg_l1(d.x, d.y, lr_config(0.01), d.names);
  EXPECT_THROW(predict_linear(m, std::vector<double>{1.0}), Error);
}

TEST(PositiveWeight, NegativesOverPositives) {
  TrainConfig c;
  EXPECT_EQ(resolve_positive_weight(c, std::vector<int>{1, 0, 0, 0}), 3.0);
  EXPECT_EQ(resolve_positive_weight(c, std::vector<int>{0, 0}), 1.0);
  c.positive_weight = 2.5;
  EXPECT_EQ(resolve_positive_weight(c, std::vector<int>{1, 0}), 2.5);
}

TEST(RandomForest, DeepTreesShatterDistinctRows) {
  const auto d = logistic_data(150, {1.0, -1.0, 0.3}, 0.0, 5);
  auto cfg = default_train_config(ModelKind::random_forest);
  cfg.n_trees = 1;
  cfg.bootstrap = false;
  cfg.feature_subset_size = 3;
  const auto m = fit_random_forest(d.x, d.y, cfg, d.names);
  for (std::size_t i = 0; i < d.x.rows(); ++i)
    EXPECT_EQ(predict_ensemble(m, d.x.row(i)) >= 0.5 ? 1 : 0, d.y[i]);
}

TEST(RandomForest, ProbabilitiesBoundedAndDeterministic) {
  const auto d = logistic_data(300, {1.0, -1.0, 0.3, 0.0}, -1.0, 6);
  auto cfg = default_train_config(ModelKind::random_forest);
  cfg.n_trees = 20;
  const auto a = fit_random_forest(d.x, d.y, cfg, d.names);
  const auto b = fit_random_forest(d.x, d.y, cfg, d.names);
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < d.x.rows(); ++i) {
    const double p = predict_ensemble(a, d.x.row(i));
    EXPECT_GE(p, kProbabilityClamp);
    EXPECT_LE(p, 1.0 - kProbabilityClamp);
  }
  cfg.seed = 43;
  EXPECT_NE(fit_random_forest(d.x, d.y, cfg, d.names), a);
}

TEST(Gbdt, BalancedLabelsGiveZeroBase) {
  const auto d = logistic_data(100, {0.5}, 0.0, 8);
  std::vector<int> y(100);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = i % 2;
  auto cfg = default_train_config(ModelKind::gbdt);
  cfg.n_trees = 3;
  cfg.positive_weight = 1.0;
  EXPECT_EQ(fit_gbdt(d.x, y, cfg, d.names).base_score, 0.0);
}

class GbdtLoss : public ::testing::TestWithParam<int> {};

TEST_P(GbdtLoss, TrainingLossNeverIncreases) {
  const auto d = logistic_data(400, {1.0, -0.7, 0.4, 0.0}, -1.5, 20 + GetParam());
  auto cfg = default_train_config(ModelKind::gbdt);
  cfg.n_trees = 50;
  const auto m = fit_gbdt(d.x, d.y, cfg, d.names);
  ASSERT_EQ(m.info.loss_trace.size(), 51u);
  for (std::size_t t = 1; t < m.info.loss_trace.size(); ++t)
    EXPECT_LE(m.info.loss_trace[t], m.info.loss_trace[t - 1] + 1e-12);
  double sum = 0.0;
  for (const auto& tree : m.trees) sum += predict_tree(tree, d.x.row(0));
  EXPECT_DOUBLE_EQ(raw_score(m, d.x.row(0)), m.base_score + m.learning_rate * sum);
}

INSTANTIATE_TEST_SUITE_P(Seeds, GbdtLoss, ::testing::Range(0, 3));

TEST(Baseline, LabelDistributionRate) {
  std::vector<int> labels(1000, 0);
  std::fill(labels.begin(), labels.begin() + 200, 1);
  const auto m = fit_baseline(labels, BaselineKind::label_distribution_random, 9);
  EXPECT_EQ(m.positive_rate, 0.2);
  const auto preds = predict_baseline(m, 100000);
  EXPECT_NEAR(std::accumulate(preds.begin(), preds.end(), 0.0) / preds.size(), 0.2, 0.01);
  EXPECT_EQ(preds, predict_baseline(m, 100000));
  const auto all = predict_baseline(fit_baseline(labels, BaselineKind::always_abandon, 0), 5);
  EXPECT_EQ(all, std::vector<int>(5, 1));
  const auto none = predict_baseline(fit_baseline(labels, BaselineKind::never_abandon, 0), 5);
  EXPECT_EQ(none, std::vector<int>(5, 0));
}

TEST(Classify, ThresholdIsInclusive) {
  EXPECT_EQ(classify(std::vector<double>{0.2, 0.5, 0.9}, 0.5), (std::vector<int>{0, 1, 1}));
  EXPECT_THROW(classify(std::vector<double>{0.2}, 1.0), Error);
}

TEST(ModelJson, RoundTripIsExact) {
  const auto d = logistic_data(200, {1.0, -0.5}, -0.5, 10);
  auto gcfg = default_train_config(ModelKind::gbdt);
  gcfg.n_trees = 5;
  const std::vector<Model> models{
      fit_logreg_l1(d.x, d.y, lr_config(0.01), d.names), fit_gbdt(d.x, d.y, gcfg, d.names),
      fit_baseline(d.y, BaselineKind::label_distribution_random, 77)};
  for (const auto& m : models) {
    const auto env = model_from_json(nlohmann::json::parse(model_to_json(m, gcfg).dump()));
    EXPECT_EQ(env.model, m) << model_kind_name(m);
    ASSERT_TRUE(env.config.has_value());
    EXPECT_EQ(*env.config, gcfg);
    EXPECT_EQ(predict_scores(env.model, d.x), predict_scores(m, d.x));
  }
  EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"kind":"svm","config":null,"feature_order":[]})")),
               Error);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.positive_weight = -1.0;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(model_kind_from_string("random_forest"), ModelKind::random_forest);
  EXPECT_EQ(model_kind_from_string("lr"), ModelKind::logreg_l1);
  EXPECT_FALSE(model_kind_from_string("svm").has_value());
}

}  // namespace
}  // namespace abandon
