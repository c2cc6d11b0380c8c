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

#include <string>
#include <vector>

#include "abandon/config.hpp"

namespace abandon {
namespace {

TEST(RunConfig, DefaultRenderParsesBack) {
  const RunConfig defaults;
  const auto text = render_config(defaults);
  const auto parsed = parse_run_config(text);
  EXPECT_EQ(render_config(parsed), text);
  EXPECT_EQ(parsed.simulate.base_log_odds, defaults.simulate.base_log_odds);
  EXPECT_EQ(parsed.simulate.coefficients, defaults.simulate.coefficients);
  EXPECT_EQ(parsed.lr, defaults.lr);
  EXPECT_EQ(parsed.gbdt, defaults.gbdt);
  EXPECT_EQ(parsed.interpret, defaults.interpret);
  EXPECT_NO_THROW(parsed.validate());
}

TEST(RunConfig, PartialFileKeepsDefaults) {
  const auto c = parse_run_config(
      "[run]\nseed = 7\nlevels = 1-3,5\n\n[gbdt]\nn_trees = 5\npositive_weight = 2\n"
      "[simulate]\nn_learners = 300\ntotal_dur_coef = 0.25\n");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.levels, (std::vector<int>{1, 2, 3, 5}));
  EXPECT_EQ(c.gbdt.n_trees, 5);
  EXPECT_EQ(c.gbdt.positive_weight, 2.0);
  EXPECT_EQ(c.rf, RunConfig{}.rf);
  EXPECT_EQ(c.simulate.n_learners, 300u);
  EXPECT_EQ(c.simulate.coefficients[0], 0.25);
  EXPECT_EQ(c.effective_simulate_seed(), 7u);
  EXPECT_EQ(c.eval_config().models.front().seed, 7u);
}

TEST(RunConfig, RejectsUnknownKeysAndSections) {
  EXPECT_THROW(parse_run_config("[run]\nseeds = 1\n"), Error);
  EXPECT_THROW(parse_run_config("[svm]\nc = 1\n"), Error);
  EXPECT_THROW(parse_run_config("[gbdt]\nn_trees = many\n"), Error);
  EXPECT_THROW(parse_run_config("[evaluate]\nmodels = gbdt,svm\n"), Error);
}

TEST(RunConfig, ValidationCatchesBadValues) {
  EXPECT_THROW(parse_run_config("[simulate]\nn_learners = 0\n").validate(), Error);
  EXPECT_THROW(parse_run_config("[evaluate]\ntest_fraction = 1.5\n").validate(), Error);
  EXPECT_THROW(parse_run_config("[input]\nrecords = r.csv\n").validate(), Error);
}

TEST(RunConfig, CanonicalFormIgnoresOutputLocation) {
  RunConfig a, b;
  b.output_dir = "elsewhere";
  b.jobs = 4;
  EXPECT_EQ(render_config(a, true), render_config(b, true));
  EXPECT_EQ(render_config(a, true).find(';'), std::string::npos);
  b.seed = 1;
  EXPECT_NE(render_config(a, true), render_config(b, true));
}

TEST(Levels, ParseAndFormat) {
  EXPECT_EQ(parse_levels("1-5"), (std::vector<int>{1, 2, 3, 4, 5}));
  EXPECT_EQ(parse_levels("3, 1,2"), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(format_levels({1, 2, 3, 5, 7, 8}), "1-3,5,7-8");
  EXPECT_THROW(parse_levels("0"), Error);
  EXPECT_THROW(parse_levels("4-2"), Error);
  EXPECT_THROW(parse_levels("x"), Error);
  EXPECT_THROW(parse_levels(""), Error);
}

}  // namespace
}  // namespace abandon
