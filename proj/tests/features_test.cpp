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
#include <numeric>
#include <sstream>
#include <string>

#include "abandon/features.hpp"
#include "abandon/log_ingest.hpp"
#include "abandon/simgen.hpp"

namespace abandon {
namespace {

LevelPlayRecord rec(const std::string& id, int level, bool completed, double total_dur = 1.0) {
  LevelPlayRecord r;
  r.learner_id = id;
  r.level = level;
  r.completed = completed;
  r.measures.fill(1.0);
  r.measures[0] = total_dur;
  return r;
}

GameLog make_log(std::vector<LevelPlayRecord> records, const std::vector<std::string>& ids) {
  std::vector<LearnerProfile> profiles;
  for (const auto& id : ids) profiles.push_back({id, id == "A" ? 1 : 0});
  return GameLog(std::move(records), std::move(profiles));
}

TEST(Cohort, IncludesOnlyCompleters) {
  const auto log = make_log({rec("A", 1, true), rec("A", 2, true), rec("B", 1, true),
                             rec("B", 2, false)},
                            {"A", "B"});
  EXPECT_EQ(build_cohort(log, 2), std::vector<std::string>{"A"});
  EXPECT_EQ(build_cohort(log, 1), (std::vector<std::string>{"A", "B"}));
  EXPECT_TRUE(build_cohort(GameLog{}, 1).empty());
  EXPECT_THROW(build_cohort(log, 0), Error);
}

TEST(Label, FollowsNextLevelCompletion) {
  const auto log = make_log({rec("A", 1, true), rec("A", 2, true), rec("B", 1, true),
                             rec("B", 2, false), rec("C", 1, true)},
                            {"A", "B", "C"});
  EXPECT_EQ(label_abandonment(log, "A", 1), 0);
  EXPECT_EQ(label_abandonment(log, "B", 1), 1);  // attempted, failed
  EXPECT_EQ(label_abandonment(log, "C", 1), 1);  // never opened level 2
  EXPECT_THROW(label_abandonment(log, "B", 2), Error);
}

TEST(CumulativeFeatures, SumsCompletedLevels) {
  const auto log = make_log({rec("A", 1, true, 100), rec("A", 2, true, 200), rec("A", 3, true, 300),
                             rec("A", 4, false, 999)},
                            {"A"});
  const auto names = feature_names(FeatureMode::cumulative);
  ASSERT_EQ(names.size(), 12u);
  const auto fv3 = cumulative_features(log, "A", 3, FeatureMode::cumulative);
  EXPECT_EQ(fv3.values[0], 600.0);
  EXPECT_EQ(fv3.values[11], 1.0);  // activated
  const auto fv1 = cumulative_features(log, "A", 1, FeatureMode::cumulative);
  EXPECT_EQ(fv1.values[0], 100.0);
  for (std::size_t i = 1; i < kNumMeasures; ++i) EXPECT_EQ(fv1.values[i], 1.0);
}

TEST(CumulativeFeatures, MissingConstituentPropagates) {
  auto l2 = rec("A", 2, true);
  l2.measures[measure_index("n_step").value()].reset();
  const auto log = make_log({rec("A", 1, true), l2, rec("A", 3, true)}, {"A"});
  const auto fv = cumulative_features(log, "A", 3, FeatureMode::cumulative);
  EXPECT_TRUE(fv.missing(measure_index("n_step").value()));
  EXPECT_FALSE(fv.missing(0));
  EXPECT_FALSE(cumulative_features(log, "A", 1, FeatureMode::cumulative)
                   .missing(measure_index("n_step").value()));
}

TEST(CumulativeFeatures, ExtendedModeAppendsLevelValues) {
  const auto log = make_log({rec("A", 1, true, 100), rec("A", 2, true, 200)}, {"A"});
  const auto names = feature_names(FeatureMode::extended);
  ASSERT_EQ(names.size(), 23u);
  const auto fv = cumulative_features(log, "A", 2, FeatureMode::extended);
  ASSERT_EQ(fv.values.size(), 23u);
  EXPECT_EQ(fv.values[0], 300.0);
  EXPECT_EQ(fv.values[12], 200.0);
}

TEST(AssembleMatrix, HandCountedFixture) {
  std::vector<LevelPlayRecord> records;
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) {
    const std::string id = "U" + std::to_string(i);
    ids.push_back(id);
    records.push_back(rec(id, 1, true));
    if (i < 7) records.push_back(rec(id, 2, true));
    else if (i == 7) records.push_back(rec(id, 2, false));
  }
  const auto m = assemble_matrix(make_log(records, ids), 1);
  EXPECT_EQ(m.rows(), 10u);
  EXPECT_EQ(std::accumulate(m.labels.begin(), m.labels.end(), 0), 3);
  EXPECT_TRUE(std::is_sorted(m.learner_ids.begin(), m.learner_ids.end()));

  FeatureOptions exclude;
  exclude.exclude_never_attempted = true;
  const auto mx = assemble_matrix(make_log(records, ids), 1, exclude);
  EXPECT_EQ(mx.rows(), 8u);
  EXPECT_EQ(std::accumulate(mx.labels.begin(), mx.labels.end(), 0), 1);
}

TEST(AssembleMatrix, EmptyCohortIsError) {
  const auto log = make_log({rec("A", 1, true)}, {"A"});
  try {
    assemble_matrix(log, 7);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "no cohort at level 7");
  }
}

TEST(AssembleMatrix, AllContinueMeansAllZero) {
  const auto log = make_log({rec("A", 1, true), rec("A", 2, true), rec("B", 1, true),
                             rec("B", 2, true)},
                            {"A", "B"});
  const auto m = assemble_matrix(log, 1);
  EXPECT_EQ(m.labels, (std::vector<int>{0, 0}));
}

TEST(AssembleMatrix, CsvRoundTripKeepsMissingCells) {
  auto l2 = rec("A", 2, true);
  l2.measures[3].reset();
  const auto log = make_log({rec("A", 1, true, 0.1), l2, rec("B", 1, true, 1e-7), rec("B", 2, true),
                             rec("A", 3, true), rec("B", 3, false)},
                            {"A", "B"});
  const auto m = assemble_matrix(log, 2);
  std::ostringstream os;
  write_matrix_csv(os, m);
  EXPECT_EQ(os.str().substr(0, 22), "learner_id,label,cml_t");
  std::istringstream is(os.str());
  EXPECT_EQ(read_matrix_csv(is, 2), m);
}

class SimulatedLogProperties : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    auto config = default_paper_shaped_config();
    config.n_learners = 2000;
    config.seed = 11;
    log_ = new GameLog(generate(config).log);
  }
  static void TearDownTestSuite() { delete log_; }
  static GameLog* log_;
};

GameLog* SimulatedLogProperties::log_ = nullptr;

TEST_F(SimulatedLogProperties, CumulativeFeaturesAreMonotone) {
  for (const auto& id : build_cohort(*log_, 3)) {
    for (int n = 1; n < 3; ++n) {
      const auto a = cumulative_features(*log_, id, n, FeatureMode::cumulative);
      const auto b = cumulative_features(*log_, id, n + 1, FeatureMode::cumulative);
      for (std::size_t i = 0; i < kNumMeasures; ++i) {
        if (!a.missing(i) && !b.missing(i)) {
          EXPECT_LE(a.values[i], b.values[i]);
        }
      }
    }
  }
}

TEST_F(SimulatedLogProperties, CohortsNestAndLabelsAgree) {
  for (int n = 1; n <= 4; ++n) {
    const auto cohort = build_cohort(*log_, n);
    const auto next = build_cohort(*log_, n + 1);
    std::vector<std::string> stayed;
    for (const auto& id : cohort) {
      const int y = label_abandonment(*log_, id, n);
      const bool in_next = std::binary_search(next.begin(), next.end(), id);
      EXPECT_EQ(y == 0, in_next) << id << " level " << n;
      if (y == 0) stayed.push_back(id);
    }
    EXPECT_EQ(stayed, next);
  }
}

TEST_F(SimulatedLogProperties, AssemblyIsDeterministic) {
  std::ostringstream a, b;
  write_matrix_csv(a, assemble_matrix(*log_, 2));
  write_matrix_csv(b, assemble_matrix(*log_, 2));
  EXPECT_EQ(a.str(), b.str());
}

TEST(AssembleMatrix, SimulatedLevelOneLabelRate) {
  auto config = default_paper_shaped_config();
  config.coefficients.fill(0.0);
  config.activated_coefficient = 0.0;
  config.base_log_odds.assign(5, std::log(0.14 / 0.86));
  const auto m = assemble_matrix(generate(config).log, 1);
  const double mean = std::accumulate(m.labels.begin(), m.labels.end(), 0.0) / m.rows();
  EXPECT_NEAR(mean, 0.14, 0.02);
}

}  // namespace
}  // namespace abandon
