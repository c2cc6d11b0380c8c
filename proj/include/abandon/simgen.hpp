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

// Seeded synthetic game-log generator with planted abandonment effects.
//
// Each learner has a latent engagement e ~ N(0, 1). Per-level durations are
// log-normal, exp(mu + loading * e + noise * N(0, 1)), rounded to 0.01 s;
// per-level counts are Poisson(exp(mu + loading * e)). After completing level
// n the learner abandons level n + 1 with probability
//
//   sigmoid(base[n] + sum_f beta_f * cml_f / sd_f(n)
//           + beta_act * activated / sqrt(r (1 - r)) + gamma * e)
//
// where sd_f(n) is the population standard deviation of an n-level sum of
// measure f and r is the activation rate. Features are divided by their
// scale but not centered, so base[n] carries the level's overall rate.

#ifndef ABANDON_SIMGEN_HPP_
#define ABANDON_SIMGEN_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "abandon/error.hpp"
#include "abandon/log_ingest.hpp"
#include "abandon/models.hpp"
#include "abandon/random.hpp"
#include "json.hpp"

namespace abandon {

struct MeasureParams {
  double mu = 0.0;
  double loading = 0.0;
  double noise = 0.0;  // durations only

  friend bool operator==(const MeasureParams&, const MeasureParams&) = default;
};

struct SimConfig {
  std::size_t n_learners = 10000;
  int n_levels = 6;
  std::uint64_t seed = 42;
  double activation_rate = 0.24;
  // Probability a learner never completes level 1.
  double first_level_failure = 0.0;
  // Abandonment log-odds offset for levels 1 .. n_levels - 1.
  std::vector<double> base_log_odds;
  std::array<double, kNumMeasures> coefficients{};
  double activated_coefficient = 0.0;
  double engagement_coefficient = 0.0;
  std::array<MeasureParams, kNumMeasures> measures{};
  std::array<double, kNumMeasures> missing_rates{};
  // Share of abandoning learners who leave no record for the next level.
  double never_attempt_fraction = 0.3;

  void validate() const {
    auto rate = [](double v, const char* what) {
      if (!(v >= 0.0 && v <= 1.0)) throw Error(std::string(what) + " must lie in [0, 1]");
    };
    if (n_learners == 0) throw Error("n_learners must be >= 1");
    if (n_levels < 2) throw Error("n_levels must be >= 2");
    rate(activation_rate, "activation_rate");
    rate(first_level_failure, "first_level_failure");
    rate(never_attempt_fraction, "never_attempt_fraction");
    for (double m : missing_rates) rate(m, "missing rate");
    if (base_log_odds.size() != static_cast<std::size_t>(n_levels - 1))
      throw Error("base_log_odds needs n_levels - 1 = " + std::to_string(n_levels - 1) +
                  " entries, got " + std::to_string(base_log_odds.size()));
    for (double b : base_log_odds)
      if (!std::isfinite(b)) throw Error("base_log_odds must be finite");
    for (double c : coefficients)
      if (!std::isfinite(c)) throw Error("planted coefficients must be finite");
    if (!std::isfinite(activated_coefficient) || !std::isfinite(engagement_coefficient))
      throw Error("planted coefficients must be finite");
    for (std::size_t f = 0; f < kNumMeasures; ++f) {
      const auto& m = measures[f];
      if (!std::isfinite(m.mu) || !std::isfinite(m.loading) || !(m.noise >= 0.0))
        throw Error("invalid distribution parameters for " + std::string(kMeasureNames[f]));
    }
  }
};

// Population standard deviation of the sum of `levels` independent-given-e
// draws of measure f, with e ~ N(0, 1) shared across the draws.
inline double feature_scale(const SimConfig& config, std::size_t f, int levels) {
  const auto& m = config.measures[f];
  const double n = levels, c2 = m.loading * m.loading;
  double es = 0.0, es2 = 0.0;
  if (is_count_measure(f)) {
    es = n * std::exp(m.mu + c2 / 2.0);
    es2 = es + n * n * std::exp(2.0 * m.mu + 2.0 * c2);
  } else {
    const double s2 = m.noise * m.noise;
    es = n * std::exp(m.mu + (c2 + s2) / 2.0);
    es2 = n * std::exp(2.0 * m.mu + 2.0 * c2 + 2.0 * s2) +
          n * (n - 1.0) * std::exp(2.0 * m.mu + 2.0 * c2 + s2);
  }
  return std::sqrt(std::max(es2 - es * es, 0.0));
}

// Abandonment log-odds after completing `level`, given cumulative measures.
inline double planted_log_odds(const SimConfig& config, int level,
                               std::span<const double> cumulative, bool activated,
                               double engagement) {
  double lo = config.base_log_odds.at(static_cast<std::size_t>(level - 1));
  for (std::size_t f = 0; f < kNumMeasures; ++f) {
    if (config.coefficients[f] == 0.0) continue;
    lo += config.coefficients[f] * cumulative[f] / feature_scale(config, f, level);
  }
  const double r = config.activation_rate;
  if (activated && r > 0.0 && r < 1.0)
    lo += config.activated_coefficient / std::sqrt(r * (1.0 - r));
  lo += config.engagement_coefficient * engagement;
  return lo;
}

struct LearnerTruth {
  std::string learner_id;
  double engagement = 0.0;
  bool activated = false;
  // One entry per level the learner completed (and had a decision for).
  std::vector<double> probabilities;
  std::vector<int> labels;
};

struct SimTruth {
  std::vector<LearnerTruth> learners;
};

struct SimResult {
  GameLog log;
  SimTruth truth;
};

inline std::string sim_learner_id(std::size_t index, std::size_t n_learners) {
  const std::string digits = std::to_string(index + 1);
  const std::size_t width = std::max<std::size_t>(6, std::to_string(n_learners).size());
  return "L" + std::string(width - digits.size(), '0') + digits;
}

namespace detail {

enum SimStream : std::uint64_t { kLatent = 0, kMeasures = 1, kMissing = 2, kDecisions = 3 };

inline double round_centi(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace detail

// Deterministic given config.seed. Every learner draws from its own streams,
// and each stream consumes a fixed number of variates, so changing a planted
// coefficient leaves every other draw unchanged.
inline SimResult generate(const SimConfig& config) {
  config.validate();
  const auto levels = static_cast<std::size_t>(config.n_levels);
  std::vector<LevelPlayRecord> records;
  std::vector<LearnerProfile> profiles;
  SimResult result;
  result.truth.learners.reserve(config.n_learners);
  std::vector<std::array<double, kNumMeasures>> values(levels);
  std::vector<std::array<bool, kNumMeasures>> masked(levels);

  for (std::size_t i = 0; i < config.n_learners; ++i) {
    const std::string id = sim_learner_id(i, config.n_learners);
    Rng latent = make_rng(config.seed, {i, detail::kLatent});
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double e = normal(latent);
    const bool activated = unif(latent) < config.activation_rate;

    Rng meas = make_rng(config.seed, {i, detail::kMeasures});
    for (std::size_t k = 0; k < levels; ++k) {
      for (std::size_t f = 0; f < kNumMeasures; ++f) {
        const auto& m = config.measures[f];
        if (is_count_measure(f)) {
          std::poisson_distribution<long long> pois(std::exp(m.mu + m.loading * e));
          values[k][f] = static_cast<double>(pois(meas));
        } else {
          const double z = normal(meas);
          values[k][f] = detail::round_centi(std::exp(m.mu + m.loading * e + m.noise * z));
        }
      }
    }
    Rng miss = make_rng(config.seed, {i, detail::kMissing});
    for (std::size_t k = 0; k < levels; ++k)
      for (std::size_t f = 0; f < kNumMeasures; ++f)
        masked[k][f] = unif(miss) < config.missing_rates[f];

    Rng dec = make_rng(config.seed, {i, detail::kDecisions});
    const double u_first = unif(dec);
    std::vector<double> u_label(levels), u_never(levels);
    for (std::size_t k = 0; k + 1 < levels; ++k) {
      u_label[k] = unif(dec);
      u_never[k] = unif(dec);
    }

    auto emit = [&](std::size_t k, bool completed) {
      LevelPlayRecord r;
      r.learner_id = id;
      r.level = static_cast<int>(k + 1);
      r.completed = completed;
      for (std::size_t f = 0; f < kNumMeasures; ++f)
        if (!masked[k][f]) r.measures[f] = values[k][f];
      records.push_back(std::move(r));
    };

    LearnerTruth truth;
    truth.learner_id = id;
    truth.engagement = e;
    truth.activated = activated;
    profiles.push_back({id, activated ? 1 : 0});

    if (u_first < config.first_level_failure) {
      emit(0, false);
      result.truth.learners.push_back(std::move(truth));
      continue;
    }
    emit(0, true);
    // Accumulated in level order starting from zero, like the feature builder.
    std::array<double, kNumMeasures> cml{};
    for (std::size_t f = 0; f < kNumMeasures; ++f) cml[f] = 0.0 + values[0][f];
    for (std::size_t k = 0; k + 1 < levels; ++k) {
      const int level = static_cast<int>(k + 1);
      const double p = sigmoid(planted_log_odds(config, level, cml, activated, e));
      const int y = u_label[k] < p ? 1 : 0;
      truth.probabilities.push_back(p);
      truth.labels.push_back(y);
      if (y == 1) {
        if (u_never[k] >= config.never_attempt_fraction) emit(k + 1, false);
        break;
      }
      emit(k + 1, true);
      for (std::size_t f = 0; f < kNumMeasures; ++f) cml[f] += values[k + 1][f];
    }
    result.truth.learners.push_back(std::move(truth));
  }
  result.log = GameLog(std::move(records), std::move(profiles));
  return result;
}

inline std::array<MeasureParams, kNumMeasures> default_measure_params() {
  // total_dur, idle, code, test, help, mission, world; n_restart, n_step,
  // n_line, n_play.
  return {{{std::log(150.0), 0.5, 0.5},
           {std::log(60.0), 0.4, 0.7},
           {std::log(80.0), 0.5, 0.5},
           {std::log(40.0), 0.5, 0.6},
           {std::log(20.0), 0.4, 0.8},
           {std::log(15.0), 0.3, 0.6},
           {std::log(25.0), 0.3, 0.6},
           {std::log(3.0), 0.4, 0.0},
           {std::log(8.0), 0.4, 0.0},
           {std::log(5.0), 0.4, 0.0},
           {std::log(6.0), 0.4, 0.0}}};
}

// Planted signs: positive for total_dur, idle_time, n_step, n_restart;
// negative for help_time and activated; zero elsewhere. Base log-odds are
// calibrated (see calibrate_base_log_odds) so the per-level abandonment rates
// are about {0.14, 0.12, 0.16, 0.13, 0.12}.
inline SimConfig default_paper_shaped_config() {
  SimConfig c;
  c.n_learners = 10000;
  c.n_levels = 6;
  c.seed = 42;
  c.activation_rate = 0.24;
  c.first_level_failure = 0.343;
  c.measures = default_measure_params();
  c.coefficients.fill(0.0);
  c.coefficients[measure_index("total_dur").value()] = 0.6;
  c.coefficients[measure_index("idle_time").value()] = 0.6;
  c.coefficients[measure_index("help_time").value()] = -0.6;
  c.coefficients[measure_index("n_restart").value()] = 0.5;
  c.coefficients[measure_index("n_step").value()] = 0.5;
  c.activated_coefficient = -0.7;
  c.engagement_coefficient = 0.0;
  c.base_log_odds = {-4.6063, -4.8158, -4.2898, -4.4067, -4.3857};
  c.missing_rates.fill(0.0);
  for (auto name : {"total_dur", "n_restart", "n_step", "n_line", "n_play"})
    c.missing_rates[measure_index(name).value()] = 0.03;
  c.never_attempt_fraction = 0.3;
  return c;
}

// Empirical abandonment rate per labeled level.
inline std::vector<double> level_abandonment_rates(const SimConfig& config,
                                                   const SimTruth& truth) {
  const auto n = static_cast<std::size_t>(config.n_levels - 1);
  std::vector<double> pos(n, 0.0), total(n, 0.0);
  for (const auto& l : truth.learners) {
    for (std::size_t k = 0; k < l.labels.size(); ++k) {
      pos[k] += l.labels[k];
      total[k] += 1.0;
    }
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) out[k] = total[k] > 0 ? pos[k] / total[k] : 0.0;
  return out;
}

// Fixed-point iteration on the base log-odds toward target per-level rates,
// using mean true probabilities of a large simulated population.
inline std::vector<double> calibrate_base_log_odds(SimConfig config,
                                                   std::span<const double> targets,
                                                   int iterations = 8) {
  if (targets.size() != static_cast<std::size_t>(config.n_levels - 1))
    throw Error("calibration needs one target per labeled level");
  config.base_log_odds.resize(targets.size(), -4.0);
  for (int it = 0; it < iterations; ++it) {
    const auto sim = generate(config);
    const auto n = targets.size();
    std::vector<double> psum(n, 0.0), count(n, 0.0);
    for (const auto& l : sim.truth.learners)
      for (std::size_t k = 0; k < l.probabilities.size(); ++k) {
        psum[k] += l.probabilities[k];
        count[k] += 1.0;
      }
    for (std::size_t k = 0; k < n; ++k) {
      if (count[k] == 0) continue;
      const double rate = std::clamp(psum[k] / count[k], 1e-9, 1.0 - 1e-9);
      config.base_log_odds[k] += logit(targets[k]) - logit(rate);
    }
  }
  return config.base_log_odds;
}

inline nlohmann::ordered_json truth_to_json(const SimTruth& truth) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& l : truth.learners) {
    nlohmann::ordered_json levels = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < l.labels.size(); ++k)
      levels[std::to_string(k + 1)] = {{"p", l.probabilities[k]}, {"label", l.labels[k]}};
    j[l.learner_id] = {
        {"engagement", l.engagement}, {"activated", l.activated}, {"levels", std::move(levels)}};
  }
  return j;
}

}  // namespace abandon

#endif  // ABANDON_SIMGEN_HPP_
