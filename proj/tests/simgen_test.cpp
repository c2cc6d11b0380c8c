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

#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "abandon/features.hpp"
#include "abandon/simgen.hpp"
#include "oracles.hpp"

namespace abandon {
namespace {

SimConfig quiet_config(std::size_t n, std::uint64_t seed) {
  auto c = default_paper_shaped_config();
  c.n_learners = n;
  c.seed = seed;
  c.missing_rates.fill(0.0);
  return c;
}

std::string records_csv(const GameLog& log) {
  std::ostringstream os;
  write_records_csv(os, log);
  write_profiles_csv(os, log);
  return os.str();
}

TEST(Generate, SameSeedSameBytes) {
  auto c = default_paper_shaped_config();
  c.n_learners = 500;
  const auto a = generate(c), b = generate(c);
  EXPECT_EQ(records_csv(a.log), records_csv(b.log));
  EXPECT_EQ(truth_to_json(a.truth).dump(), truth_to_json(b.truth).dump());
  c.seed = 43;
  EXPECT_NE(records_csv(generate(c).log), records_csv(a.log));
}

TEST(Generate, LearnerIds) {
  EXPECT_EQ(sim_learner_id(0, 10), "L000001");
  EXPECT_EQ(sim_learner_id(1233, 2000000), "L0001234");
  const auto sim = generate(quiet_config(20, 1));
  EXPECT_EQ(sim.log.profiles().size(), 20u);
  EXPECT_TRUE(validate(sim.log).ok());
}

TEST(Generate, ZeroCoefficientsGiveBaseRate) {
  auto c = quiet_config(20000, 5);
  c.coefficients.fill(0.0);
  c.activated_coefficient = 0.0;
  c.first_level_failure = 0.0;
  c.base_log_odds = {logit(0.14), logit(0.12), logit(0.16), logit(0.13), logit(0.12)};
  const auto sim = generate(c);
  const auto rates = level_abandonment_rates(c, sim.truth);
  double survivors = c.n_learners;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    const double p = sigmoid(c.base_log_odds[k]);
    EXPECT_NEAR(rates[k], p, 3 * oracle::binomial_sd(p, survivors)) << "level " << k + 1;
    survivors *= 1 - p;
  }
}

TEST(Generate, DefaultRatesArePaperShaped) {
  const auto c = default_paper_shaped_config();
  const auto sim = generate(c);
  const auto rates = level_abandonment_rates(c, sim.truth);
  ASSERT_EQ(rates.size(), 5u);
  for (double r : rates) {
    EXPECT_GT(r, 0.0);
    EXPECT_LT(r, 0.343);
  }
  EXPECT_NEAR(std::accumulate(rates.begin(), rates.end(), 0.0) / 5.0, 0.134, 0.02);
  std::size_t failed = 0;
  for (const auto& l : sim.truth.learners) failed += l.labels.empty();
  EXPECT_NEAR(double(failed) / c.n_learners, 0.343, 3 * oracle::binomial_sd(0.343, c.n_learners));
}

TEST(Generate, TruthMatchesAssembledFeatures) {
  const auto c = quiet_config(800, 9);
  const auto sim = generate(c);
  std::map<std::string, const LearnerTruth*> truth;
  for (const auto& l : sim.truth.learners) truth[l.learner_id] = &l;
  for (int level = 1; level <= 5; ++level) {
    const auto m = assemble_matrix(sim.log, level);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const auto* t = truth.at(m.learner_ids[r]);
      ASSERT_GE(t->labels.size(), static_cast<std::size_t>(level));
      EXPECT_EQ(t->labels[level - 1], m.labels[r]);
      const auto row = m.values.row(r);
      for (double v : row) ASSERT_FALSE(is_missing(v));
      const double p = sigmoid(planted_log_odds(c, level, row.first(kNumMeasures),
                                                row[kNumMeasures] == 1.0, t->engagement));
      EXPECT_EQ(p, t->probabilities[level - 1]);
    }
  }
}

TEST(Generate, MissingnessFollowsRates) {
  auto c = quiet_config(4000, 2);
  c.missing_rates[0] = 0.2;
  const auto sim = generate(c);
  double missing = 0, total = 0, other = 0;
  for (const auto& r : sim.log.records()) {
    missing += !r.measures[0].has_value();
    for (std::size_t f = 1; f < kNumMeasures; ++f) other += !r.measures[f].has_value();
    total += 1;
  }
  EXPECT_NEAR(missing / total, 0.2, 3 * oracle::binomial_sd(0.2, total));
  EXPECT_EQ(other, 0.0);
}

TEST(Generate, CommonRandomNumbersMakeEffectsMonotone) {
  auto low = quiet_config(3000, 4);
  auto high = low;
  high.coefficients[0] += 0.5;
  const auto a = generate(low), b = generate(high);
  std::size_t up = 0;
  for (std::size_t i = 0; i < a.truth.learners.size(); ++i) {
    const auto& ta = a.truth.learners[i];
    const auto& tb = b.truth.learners[i];
    EXPECT_EQ(ta.engagement, tb.engagement);
    ASSERT_EQ(ta.labels.empty(), tb.labels.empty());
    if (ta.labels.empty()) continue;
    EXPECT_GE(tb.probabilities[0], ta.probabilities[0]);
    EXPECT_GE(tb.labels[0], ta.labels[0]);
    up += tb.labels[0] > ta.labels[0];
  }
  EXPECT_GT(up, 0u);
}

TEST(Generate, CohortsShrink) {
  const auto sim = generate(quiet_config(3000, 6));
  std::size_t previous = sim.log.profiles().size();
  for (int level = 1; level <= 6; ++level) {
    const auto size = build_cohort(sim.log, level).size();
    EXPECT_LT(size, previous);
    previous = size;
  }
}

TEST(Generate, CalibrationHitsTargets) {
  auto c = quiet_config(20000, 3);
  const std::vector<double> targets{0.2, 0.1, 0.15, 0.1, 0.1};
  c.base_log_odds = calibrate_base_log_odds(c, targets, 6);
  c.seed = 99;
  const auto rates = level_abandonment_rates(c, generate(c).truth);
  for (std::size_t k = 0; k < targets.size(); ++k) EXPECT_NEAR(rates[k], targets[k], 0.025);
}

TEST(SimConfig, Validation) {
  auto c = default_paper_shaped_config();
  c.n_learners = 0;
  EXPECT_THROW(generate(c), Error);
  c = default_paper_shaped_config();
  c.base_log_odds.pop_back();
  EXPECT_THROW(c.validate(), Error);
  c = default_paper_shaped_config();
  c.missing_rates[3] = 1.5;
  EXPECT_THROW(c.validate(), Error);
  c = default_paper_shaped_config();
  c.n_levels = 1;
  EXPECT_THROW(c.validate(), Error);
}

}  // namespace
}  // namespace abandon
