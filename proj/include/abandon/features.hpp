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

// Per-level cohorts, abandonment labels, and cumulative feature matrices.

#ifndef ABANDON_FEATURES_HPP_
#define ABANDON_FEATURES_HPP_

#include <algorithm>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abandon/error.hpp"
#include "abandon/log_ingest.hpp"
#include "abandon/matrix.hpp"
#include "abandon/text.hpp"

namespace abandon {

// cumulative: 11 cml_* sums plus activated (12 columns).
// extended: the same 12 followed by the 11 level-n values (23 columns).
enum class FeatureMode { cumulative, extended };

inline std::string_view to_string(FeatureMode mode) {
  return mode == FeatureMode::cumulative ? "cumulative" : "extended";
}

inline constexpr std::string_view kActivatedFeature = "activated";

inline std::vector<std::string> feature_names(FeatureMode mode) {
  std::vector<std::string> names;
  for (auto m : kMeasureNames) names.push_back("cml_" + std::string(m));
  names.emplace_back(kActivatedFeature);
  if (mode == FeatureMode::extended)
    for (auto m : kMeasureNames) names.emplace_back(m);
  return names;
}

struct FeatureOptions {
  FeatureMode mode = FeatureMode::cumulative;
  // Drop cohort members who never opened level n+1 instead of labeling them
  // abandoned.
  bool exclude_never_attempted = false;
};

// Values aligned with feature_names(mode); missing cells are kMissing.
struct FeatureVector {
  std::vector<double> values;

  bool missing(std::size_t i) const { return is_missing(values[i]); }
};

struct LabeledMatrix {
  int level = 0;
  std::vector<std::string> feature_names;
  std::vector<std::string> learner_ids;
  std::vector<int> labels;  // 1 = abandoned
  Matrix values;

  std::size_t rows() const { return learner_ids.size(); }
  std::size_t cols() const { return feature_names.size(); }

  std::optional<std::size_t> feature_index(std::string_view name) const {
    for (std::size_t i = 0; i < feature_names.size(); ++i)
      if (feature_names[i] == name) return i;
    return std::nullopt;
  }

  LabeledMatrix select_rows(std::span<const std::size_t> rows) const {
    LabeledMatrix out;
    out.level = level;
    out.feature_names = feature_names;
    out.values = values.select_rows(rows);
    for (auto r : rows) {
      out.learner_ids.push_back(learner_ids[r]);
      out.labels.push_back(labels[r]);
    }
    return out;
  }

  friend bool operator==(const LabeledMatrix&, const LabeledMatrix&) = default;
};

inline bool completed_level(const GameLog& log, std::string_view learner_id, int level) {
  const auto* r = log.find(learner_id, level);
  return r != nullptr && r->completed;
}

// Learners with a completed record at level n, sorted by learner_id.
inline std::vector<std::string> build_cohort(const GameLog& log, int level) {
  if (level < 1) throw Error("level must be >= 1");
  std::vector<std::string> out;
  for (const auto& r : log.records())
    if (r.level == level && r.completed) out.push_back(r.learner_id);
  // records() is sorted by learner_id already.
  return out;
}

// 1 unless the learner completed level n+1; a never-opened next level counts
// as abandoned.
inline int label_abandonment(const GameLog& log, std::string_view learner_id, int level) {
  if (!completed_level(log, learner_id, level))
    throw Error("learner '" + std::string(learner_id) + "' did not complete level " +
                std::to_string(level));
  return completed_level(log, learner_id, level + 1) ? 0 : 1;
}

inline FeatureVector cumulative_features(const GameLog& log, std::string_view learner_id,
                                         int level, FeatureMode mode) {
  if (!completed_level(log, learner_id, level))
    throw Error("learner '" + std::string(learner_id) + "' did not complete level " +
                std::to_string(level));
  const auto* profile = log.profile(learner_id);
  if (profile == nullptr) throw Error("no profile for learner '" + std::string(learner_id) + "'");

  FeatureVector fv;
  fv.values.assign(kNumMeasures, 0.0);
  for (const auto& r : log.records_for(learner_id)) {
    if (r.level > level) break;
    if (!r.completed) continue;
    for (std::size_t m = 0; m < kNumMeasures; ++m) {
      if (r.measures[m]) {
        fv.values[m] += *r.measures[m];
      } else {
        fv.values[m] = kMissing;
      }
    }
  }
  fv.values.push_back(static_cast<double>(profile->activated));
  if (mode == FeatureMode::extended) {
    const auto* current = log.find(learner_id, level);
    for (const auto& m : current->measures) fv.values.push_back(m ? *m : kMissing);
  }
  return fv;
}

// One row per cohort member at level n, rows in learner_id order.
inline LabeledMatrix assemble_matrix(const GameLog& log, int level,
                                     const FeatureOptions& options = {}) {
  const auto cohort = build_cohort(log, level);
  LabeledMatrix m;
  m.level = level;
  m.feature_names = feature_names(options.mode);
  m.values = Matrix(0, m.feature_names.size());
  for (const auto& id : cohort) {
    const int label = label_abandonment(log, id, level);
    if (options.exclude_never_attempted && label == 1 && log.find(id, level + 1) == nullptr)
      continue;
    const auto fv = cumulative_features(log, id, level, options.mode);
    m.values.append_row(fv.values);
    m.learner_ids.push_back(id);
    m.labels.push_back(label);
  }
  if (m.rows() == 0) throw Error("no cohort at level " + std::to_string(level));
  return m;
}

inline void write_matrix_csv(std::ostream& os, const LabeledMatrix& m) {
  os << "learner_id,label";
  for (const auto& f : m.feature_names) os << ',' << f;
  os << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    os << text::csv_escape(m.learner_ids[r]) << ',' << m.labels[r];
    for (double v : m.values.row(r)) {
      os << ',';
      if (!is_missing(v)) os << text::format_double(v);
    }
    os << '\n';
  }
}

inline LabeledMatrix read_matrix_csv(std::istream& in, int level = 0) {
  LabeledMatrix m;
  m.level = level;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    auto cells = text::split_csv_line(line);
    if (!cells) throw ParseError(lineno, "unterminated quoted field");
    if (!have_header) {
      if (cells->size() < 2 || text::trim((*cells)[0]) != "learner_id" ||
          text::trim((*cells)[1]) != "label")
        throw ParseError(lineno, "matrix header must start with learner_id,label");
      for (std::size_t i = 2; i < cells->size(); ++i)
        m.feature_names.emplace_back(text::trim((*cells)[i]));
      m.values = Matrix(0, m.feature_names.size());
      have_header = true;
      continue;
    }
    if (cells->size() != m.feature_names.size() + 2)
      throw ParseError(lineno, "wrong number of fields");
    m.learner_ids.emplace_back(text::trim((*cells)[0]));
    auto label = text::parse_int((*cells)[1]);
    if (!label || (*label != 0 && *label != 1)) throw ParseError(lineno, "label must be 0 or 1");
    m.labels.push_back(static_cast<int>(*label));
    std::vector<double> row;
    for (std::size_t i = 2; i < cells->size(); ++i) {
      if (text::trim((*cells)[i]).empty()) {
        row.push_back(kMissing);
        continue;
      }
      auto v = text::parse_double((*cells)[i]);
      if (!v) throw ParseError(lineno, "non-numeric cell '" + (*cells)[i] + "'");
      row.push_back(*v);
    }
    m.values.append_row(row);
  }
  if (!have_header) throw ParseError(lineno, "empty matrix file");
  return m;
}

}  // namespace abandon

#endif  // ABANDON_FEATURES_HPP_
