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

// Gain importance for boosted ensembles and odds-ratio analysis from an
// interpretation logistic regression.

#ifndef ABANDON_INTERPRET_HPP_
#define ABANDON_INTERPRET_HPP_

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abandon/error.hpp"
#include "abandon/matrix.hpp"
#include "abandon/models.hpp"
#include "abandon/text.hpp"
#include "json.hpp"

namespace abandon {

struct ImportanceReport {
  int level = 0;
  std::vector<std::string> features;
  std::vector<double> shares;        // aligned with features
  std::vector<std::size_t> ranking;  // feature indices, most important first
  bool no_splits = false;
  // Pearson correlations of the model inputs, when attached.
  std::optional<Matrix> correlation;
};

inline ImportanceReport gain_importance(const TreeEnsembleModel& model, int level = 0) {
  if (model.kind != EnsembleKind::gbdt) throw Error("importance requires gbdt");
  ImportanceReport r;
  r.level = level;
  r.features = model.feature_names;
  r.shares.assign(r.features.size(), 0.0);
  for (const auto& tree : model.trees)
    for (const auto& node : tree.nodes)
      if (!node.is_leaf()) r.shares[static_cast<std::size_t>(node.feature)] += node.gain;
  const double total = std::accumulate(r.shares.begin(), r.shares.end(), 0.0);
  if (total > 0.0) {
    for (auto& s : r.shares) s /= total;
  } else {
    std::fill(r.shares.begin(), r.shares.end(), 0.0);
    r.no_splits = true;
  }
  r.ranking.resize(r.features.size());
  std::iota(r.ranking.begin(), r.ranking.end(), std::size_t{0});
  std::stable_sort(r.ranking.begin(), r.ranking.end(),
                   [&](std::size_t a, std::size_t b) { return r.shares[a] > r.shares[b]; });
  return r;
}

inline ImportanceReport gain_importance(const Model& model, int level = 0) {
  const auto* e = std::get_if<TreeEnsembleModel>(&model);
  if (e == nullptr || e->kind != EnsembleKind::gbdt) throw Error("importance requires gbdt");
  return gain_importance(*e, level);
}

// Pearson correlation between columns; constant columns correlate 0 with
// everything except themselves.
inline Matrix correlation_matrix(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < n; ++r) mean[c] += x(r, c);
    mean[c] /= static_cast<double>(std::max<std::size_t>(n, 1));
    for (std::size_t r = 0; r < n; ++r) sd[c] += (x(r, c) - mean[c]) * (x(r, c) - mean[c]);
    sd[c] = std::sqrt(sd[c]);
  }
  Matrix out(d, d);
  for (std::size_t a = 0; a < d; ++a) {
    out(a, a) = 1.0;
    for (std::size_t b = a + 1; b < d; ++b) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += (x(r, a) - mean[a]) * (x(r, b) - mean[b]);
      const double c = (sd[a] > 0 && sd[b] > 0) ? s / (sd[a] * sd[b]) : 0.0;
      out(a, b) = c;
      out(b, a) = c;
    }
  }
  return out;
}

inline void attach_correlation(ImportanceReport& report, const Matrix& inputs) {
  if (inputs.cols() != report.features.size())
    throw Error("correlation inputs do not match importance features");
  report.correlation = correlation_matrix(inputs);
}

enum class Direction { positive, negative, none };

inline std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::positive: return "+";
    case Direction::negative: return "-";
    case Direction::none: return "none";
  }
  return "none";
}

struct OddsRatioEntry {
  std::string feature;
  double coefficient = 0.0;
  double odds_ratio = 1.0;
  Direction direction = Direction::none;
};

struct OddsRatioTable {
  int level = 0;
  std::vector<OddsRatioEntry> entries;
  std::vector<std::string> warnings;

  const OddsRatioEntry* find(std::string_view feature) const {
    for (const auto& e : entries)
      if (e.feature == feature) return &e;
    return nullptr;
  }
};

inline constexpr double kCoefficientCap = 20.0;

// Unpenalized, unweighted logistic regression.
inline TrainConfig interpretation_config() {
  TrainConfig c = default_train_config(ModelKind::logreg_l1);
  c.lambda = 0.0;
  c.lambda_grid.clear();
  c.positive_weight = 1.0;
  return c;
}

inline Direction direction_of(double odds_ratio) {
  if (odds_ratio > 1.0) return Direction::positive;
  if (odds_ratio < 1.0) return Direction::negative;
  return Direction::none;
}

inline OddsRatioTable odds_ratios_from_model(const LinearModel& model, int level = 0) {
  OddsRatioTable t;
  t.level = level;
  t.warnings = model.info.warnings;
  for (std::size_t j = 0; j < model.weights.size(); ++j) {
    OddsRatioEntry e;
    e.feature = model.feature_names[j];
    e.coefficient = model.weights[j];
    if (std::abs(e.coefficient) > kCoefficientCap) {
      e.coefficient = std::copysign(kCoefficientCap, e.coefficient);
      t.warnings.push_back("coefficient for '" + e.feature + "' capped at |w| = 20");
    }
    e.odds_ratio = std::exp(e.coefficient);
    e.direction = direction_of(e.odds_ratio);
    t.entries.push_back(std::move(e));
  }
  return t;
}

inline OddsRatioTable odds_ratios(const Matrix& x, std::span<const int> labels,
                                  std::vector<std::string> feature_names,
                                  const TrainConfig& config = interpretation_config(),
                                  int level = 0) {
  const auto model = fit_logreg_l1(x, labels, config, std::move(feature_names));
  return odds_ratios_from_model(model, level);
}

enum class Consistency { consistently_positive, consistently_negative, mixed };

inline std::string_view to_string(Consistency c) {
  switch (c) {
    case Consistency::consistently_positive: return "consistently_positive";
    case Consistency::consistently_negative: return "consistently_negative";
    case Consistency::mixed: return "mixed";
  }
  return "mixed";
}

struct ConsistencyRow {
  std::string feature;
  Consistency consistency = Consistency::mixed;
};

// Uses only the sign of each OR. A feature absent at some level is mixed.
inline std::vector<ConsistencyRow> consistency_table(std::span<const OddsRatioTable> tables) {
  if (tables.size() < 2) throw Error("consistency needs at least 2 levels");
  std::vector<std::string> features;
  for (const auto& t : tables)
    for (const auto& e : t.entries)
      if (std::find(features.begin(), features.end(), e.feature) == features.end())
        features.push_back(e.feature);
  std::vector<ConsistencyRow> out;
  for (const auto& f : features) {
    bool all_pos = true, all_neg = true;
    for (const auto& t : tables) {
      const auto* e = t.find(f);
      const Direction d = e ? e->direction : Direction::none;
      all_pos = all_pos && d == Direction::positive;
      all_neg = all_neg && d == Direction::negative;
    }
    out.push_back({f, all_pos   ? Consistency::consistently_positive
                      : all_neg ? Consistency::consistently_negative
                                : Consistency::mixed});
  }
  return out;
}

// ---- Output ----------------------------------------------------------------

inline void write_importance_csv(std::ostream& os, const ImportanceReport& r) {
  os << "feature,share\n";
  for (auto i : r.ranking) os << r.features[i] << ',' << text::format_double(r.shares[i]) << '\n';
}

inline nlohmann::ordered_json importance_to_json(const ImportanceReport& r) {
  nlohmann::ordered_json j;
  j["level"] = r.level;
  j["no_splits"] = r.no_splits;
  auto shares = nlohmann::ordered_json::array();
  for (auto i : r.ranking) shares.push_back({{"feature", r.features[i]}, {"share", r.shares[i]}});
  j["shares"] = std::move(shares);
  if (r.correlation) {
    nlohmann::ordered_json corr;
    corr["features"] = r.features;
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t a = 0; a < r.correlation->rows(); ++a) {
      auto row = nlohmann::ordered_json::array();
      for (std::size_t b = 0; b < r.correlation->cols(); ++b) row.push_back((*r.correlation)(a, b));
      rows.push_back(std::move(row));
    }
    corr["matrix"] = std::move(rows);
    j["correlation"] = std::move(corr);
  }
  return j;
}

inline std::string odds_ratio_cell(const OddsRatioEntry& e) {
  const std::string sign = e.direction == Direction::positive   ? "+"
                           : e.direction == Direction::negative ? "-"
                                                                : "=";
  return fmt::format("{:.2f}({})", e.odds_ratio, sign);
}

// Rows are features, columns are levels, cells look like "1.07(+)".
inline void write_odds_ratio_csv(std::ostream& os, std::span<const OddsRatioTable> tables) {
  std::vector<std::string> features;
  for (const auto& t : tables)
    for (const auto& e : t.entries)
      if (std::find(features.begin(), features.end(), e.feature) == features.end())
        features.push_back(e.feature);
  os << "feature";
  for (const auto& t : tables) os << ",level_" << t.level;
  os << '\n';
  for (const auto& f : features) {
    os << f;
    for (const auto& t : tables) {
      os << ',';
      if (const auto* e = t.find(f)) os << odds_ratio_cell(*e);
    }
    os << '\n';
  }
}

inline void write_consistency_csv(std::ostream& os, std::span<const ConsistencyRow> rows) {
  os << "feature,consistency\n";
  for (const auto& r : rows) os << r.feature << ',' << to_string(r.consistency) << '\n';
}

inline nlohmann::ordered_json odds_ratios_to_json(std::span<const OddsRatioTable> tables) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& t : tables) {
    nlohmann::ordered_json j;
    j["level"] = t.level;
    auto entries = nlohmann::ordered_json::array();
    for (const auto& e : t.entries)
      entries.push_back({{"feature", e.feature},
                         {"coefficient", e.coefficient},
                         {"odds_ratio", e.odds_ratio},
                         {"direction", std::string(to_string(e.direction))}});
    j["entries"] = std::move(entries);
    j["warnings"] = t.warnings;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace abandon

#endif  // ABANDON_INTERPRET_HPP_
