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

// Missingness filtering, KNN imputation and z-score normalization.

#ifndef ABANDON_PREPROCESS_HPP_
#define ABANDON_PREPROCESS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abandon/error.hpp"
#include "abandon/features.hpp"
#include "abandon/matrix.hpp"
#include "json.hpp"

namespace abandon {

enum class NormalizationMode { paper_faithful_full_dataset, train_only };
enum class ZeroVariancePolicy { emit_zeros };

inline std::string_view to_string(NormalizationMode m) {
  return m == NormalizationMode::train_only ? "train_only" : "paper_faithful_full_dataset";
}

struct PreprocessConfig {
  double drop_threshold = 0.5;
  int knn_k = 5;
  NormalizationMode normalization_mode = NormalizationMode::train_only;
  ZeroVariancePolicy zero_variance_policy = ZeroVariancePolicy::emit_zeros;

  void validate() const {
    if (!(drop_threshold >= 0.0 && drop_threshold <= 1.0))
      throw Error("drop_threshold must lie in [0, 1]");
    if (knn_k < 1) throw Error("knn_k must be >= 1");
  }
};

struct FeatureMissingness {
  std::string feature;
  double fraction = 0.0;
};

inline std::vector<FeatureMissingness> missingness_report(const LabeledMatrix& m) {
  std::vector<FeatureMissingness> out;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    std::size_t missing = 0;
    for (std::size_t r = 0; r < m.rows(); ++r) missing += is_missing(m.values(r, c));
    out.push_back({m.feature_names[c],
                   m.rows() == 0 ? 0.0 : static_cast<double>(missing) / m.rows()});
  }
  return out;
}

inline LabeledMatrix drop_features(const LabeledMatrix& m,
                                   std::span<const std::string> dropped) {
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < m.cols(); ++c)
    if (std::find(dropped.begin(), dropped.end(), m.feature_names[c]) == dropped.end())
      keep.push_back(c);
  LabeledMatrix out;
  out.level = m.level;
  out.learner_ids = m.learner_ids;
  out.labels = m.labels;
  for (auto c : keep) out.feature_names.push_back(m.feature_names[c]);
  out.values = m.values.select_cols(keep);
  return out;
}

struct DropResult {
  LabeledMatrix matrix;
  std::vector<std::string> dropped;
};

// Removes features whose missing fraction exceeds the threshold.
inline DropResult drop_high_missing(const LabeledMatrix& m, const PreprocessConfig& config) {
  config.validate();
  DropResult result;
  for (const auto& fm : missingness_report(m))
    if (fm.fraction > config.drop_threshold) result.dropped.push_back(fm.feature);
  if (result.dropped.size() == m.cols() && m.cols() > 0)
    throw Error("every feature exceeds the missingness threshold");
  result.matrix = drop_features(m, result.dropped);
  return result;
}

struct ImputeResult {
  LabeledMatrix matrix;
  std::size_t imputed_cells = 0;
  std::vector<std::string> warnings;
};

namespace detail {

struct ColumnScale {
  double mean = 0.0;
  double sd = 1.0;
};

inline std::vector<ColumnScale> observed_scales(const Matrix& x) {
  std::vector<ColumnScale> out(x.cols());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < x.rows(); ++r)
      if (!is_missing(x(r, c))) {
        sum += x(r, c);
        ++n;
      }
    if (n == 0) continue;
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r)
      if (!is_missing(x(r, c))) ss += (x(r, c) - mean) * (x(r, c) - mean);
    const double sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    out[c] = {mean, sd > 0.0 ? sd : 1.0};
  }
  return out;
}

}  // namespace detail

// Fills each missing cell of `target` with the mean of that feature over the
// k nearest `donors` observed at the feature. Distance is Euclidean over the
// coordinates observed in both rows, standardized per feature with donor
// statistics and rescaled by sqrt(p / shared) so rows sharing few
// coordinates are comparable; ties go to the lexicographically smaller
// learner_id. Observed cells are copied unchanged.
inline ImputeResult knn_impute(const LabeledMatrix& target, const LabeledMatrix& donors,
                               const PreprocessConfig& config) {
  config.validate();
  if (target.feature_names != donors.feature_names)
    throw Error("imputation target and donors have different features");
  const std::size_t p = target.cols();
  const auto& x = target.values;
  const auto& d = donors.values;
  const auto scale = detail::observed_scales(d);

  for (std::size_t c = 0; c < p; ++c) {
    bool any = false;
    for (std::size_t r = 0; r < d.rows() && !any; ++r) any = !is_missing(d(r, c));
    bool needed = false;
    for (std::size_t r = 0; r < x.rows() && !needed; ++r) needed = is_missing(x(r, c));
    if (needed && !any)
      throw Error("feature '" + target.feature_names[c] + "' has no observed donor values");
  }

  ImputeResult result;
  result.matrix = target;
  std::size_t short_of_k = 0, no_shared = 0;
  const std::size_t k = static_cast<std::size_t>(config.knn_k);

  struct Candidate {
    double distance;
    std::size_t row;
  };
  std::vector<Candidate> candidates;
  std::vector<double> dist(d.rows());
  std::vector<bool> usable(d.rows());

  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    const auto n_observed = std::count_if(row.begin(), row.end(),
                                          [](double v) { return !is_missing(v); });
    if (n_observed == static_cast<std::ptrdiff_t>(p)) continue;
    if (n_observed == 0)
      throw Error("row '" + target.learner_ids[r] + "' has every feature missing");

    for (std::size_t i = 0; i < d.rows(); ++i) {
      double ss = 0.0;
      std::size_t shared = 0;
      for (std::size_t c = 0; c < p; ++c) {
        const double a = row[c], b = d(i, c);
        if (is_missing(a) || is_missing(b)) continue;
        const double diff = (a - b) / scale[c].sd;
        ss += diff * diff;
        ++shared;
      }
      usable[i] = shared > 0;
      dist[i] = shared > 0 ? std::sqrt(ss * static_cast<double>(p) / shared) : 0.0;
    }

    for (std::size_t c = 0; c < p; ++c) {
      if (!is_missing(row[c])) continue;
      candidates.clear();
      bool any_observed = false;
      for (std::size_t i = 0; i < d.rows(); ++i) {
        if (is_missing(d(i, c))) continue;
        any_observed = true;
        if (usable[i]) candidates.push_back({dist[i], i});
      }
      double value = 0.0;
      if (candidates.empty()) {
        // No donor shares a coordinate with this row: fall back to the
        // donor column mean.
        ++no_shared;
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < d.rows(); ++i)
          if (!is_missing(d(i, c))) {
            sum += d(i, c);
            ++n;
          }
        value = any_observed ? sum / n : 0.0;
      } else {
        const auto less = [&](const Candidate& a, const Candidate& b) {
          if (a.distance != b.distance) return a.distance < b.distance;
          const auto& ia = donors.learner_ids[a.row];
          const auto& ib = donors.learner_ids[b.row];
          if (ia != ib) return ia < ib;
          return a.row < b.row;
        };
        std::size_t take = k;
        if (candidates.size() < k) {
          ++short_of_k;
          take = candidates.size();
        }
        std::partial_sort(candidates.begin(), candidates.begin() + take, candidates.end(), less);
        double sum = 0.0;
        for (std::size_t j = 0; j < take; ++j) sum += d(candidates[j].row, c);
        value = sum / static_cast<double>(take);
      }
      result.matrix.values(r, c) = value;
      ++result.imputed_cells;
    }
  }
  if (short_of_k > 0)
    result.warnings.push_back(std::to_string(short_of_k) +
                              " cell(s) had fewer than k candidate donors; used all");
  if (no_shared > 0)
    result.warnings.push_back(std::to_string(no_shared) +
                              " cell(s) had no donor sharing a coordinate; used column mean");
  return result;
}

inline ImputeResult knn_impute(const LabeledMatrix& m, const PreprocessConfig& config) {
  return knn_impute(m, m, config);
}

enum class ScaleKind { scaled, binary, zero_variance };

struct FeatureScale {
  std::string feature;
  double mean = 0.0;
  double stddev = 0.0;
  ScaleKind kind = ScaleKind::scaled;

  bool scaled() const { return kind == ScaleKind::scaled; }

  friend bool operator==(const FeatureScale&, const FeatureScale&) = default;
};

struct NormalizationStats {
  std::vector<FeatureScale> features;
  std::vector<std::string> dropped;

  const FeatureScale* find(std::string_view name) const {
    for (const auto& f : features)
      if (f.feature == name) return &f;
    return nullptr;
  }

  friend bool operator==(const NormalizationStats&, const NormalizationStats&) = default;
};

inline bool is_binary_feature(std::string_view name) { return name == kActivatedFeature; }

// Mean and sample (N-1) standard deviation per continuous column. The
// activated flag is left unscaled; constant columns are flagged.
inline NormalizationStats zscore_fit(const LabeledMatrix& m) {
  NormalizationStats stats;
  const std::size_t n = m.rows();
  for (std::size_t c = 0; c < m.cols(); ++c) {
    FeatureScale fs;
    fs.feature = m.feature_names[c];
    double sum = 0.0;
    bool constant = true;
    for (std::size_t r = 0; r < n; ++r) {
      const double v = m.values(r, c);
      if (is_missing(v)) throw Error("zscore_fit requires a complete matrix");
      sum += v;
      if (v != m.values(0, c)) constant = false;
    }
    fs.mean = n > 0 ? sum / n : 0.0;
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double diff = m.values(r, c) - fs.mean;
      ss += diff * diff;
    }
    fs.stddev = (n > 1 && !constant) ? std::sqrt(ss / (n - 1)) : 0.0;
    if (is_binary_feature(fs.feature)) {
      fs.kind = ScaleKind::binary;
    } else if (fs.stddev == 0.0) {
      fs.kind = ScaleKind::zero_variance;
    }
    stats.features.push_back(fs);
  }
  return stats;
}

inline LabeledMatrix zscore_apply(const LabeledMatrix& m, const NormalizationStats& stats) {
  std::vector<const FeatureScale*> scales;
  for (const auto& name : m.feature_names) {
    const auto* fs = stats.find(name);
    if (fs == nullptr) throw Error("no normalization stats for feature '" + name + "'");
    scales.push_back(fs);
  }
  LabeledMatrix out = m;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      double& v = out.values(r, c);
      switch (scales[c]->kind) {
        case ScaleKind::scaled: v = (v - scales[c]->mean) / scales[c]->stddev; break;
        case ScaleKind::zero_variance: v = 0.0; break;
        case ScaleKind::binary: break;
      }
    }
  }
  return out;
}

inline nlohmann::ordered_json normalization_stats_to_json(const NormalizationStats& stats) {
  nlohmann::ordered_json features = nlohmann::ordered_json::object();
  for (const auto& f : stats.features) {
    features[f.feature] = {{"mean", f.mean},
                           {"std", f.stddev},
                           {"scaled", f.scaled()},
                           {"binary", f.kind == ScaleKind::binary}};
  }
  return {{"features", features}, {"dropped", stats.dropped}};
}

inline NormalizationStats normalization_stats_from_json(const nlohmann::ordered_json& j) {
  NormalizationStats stats;
  for (const auto& [name, v] : j.at("features").items()) {
    FeatureScale fs;
    fs.feature = name;
    fs.mean = v.at("mean").get<double>();
    fs.stddev = v.at("std").get<double>();
    if (v.at("scaled").get<bool>()) {
      fs.kind = ScaleKind::scaled;
    } else if (v.value("binary", false)) {
      fs.kind = ScaleKind::binary;
    } else {
      fs.kind = ScaleKind::zero_variance;
    }
    stats.features.push_back(fs);
  }
  stats.dropped = j.value("dropped", std::vector<std::string>{});
  return stats;
}

}  // namespace abandon

#endif  // ABANDON_PREPROCESS_HPP_
