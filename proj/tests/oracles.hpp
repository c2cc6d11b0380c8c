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

// Reference implementations used only by tests. Each one computes its value
// from first principles rather than through the library code it checks.

#ifndef ABANDON_TESTS_ORACLES_HPP_
#define ABANDON_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "abandon/matrix.hpp"

namespace oracle {

// Fraction of (positive, negative) pairs ranked correctly; ties count 1/2.
inline double concordance_auc(std::span<const int> labels, std::span<const double> scores) {
  double good = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) good += 1.0;
      else if (scores[i] == scores[j]) good += 0.5;
    }
  }
  return good / pairs;
}

inline double harmonic_f1(double p, double r) { return p + r == 0 ? 0.0 : 2 * p * r / (p + r); }

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Mean logistic loss of (intercept b, weights w) on x, y with per-row
// weights; the plain log(1 + exp(z)) form is fine for moderate margins.
inline double logistic_loss(const abandon::Matrix& x, std::span<const int> y,
                            std::span<const double> row_w, std::span<const double> w, double b) {
  double s = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double z = b;
    for (std::size_t j = 0; j < x.cols(); ++j) z += w[j] * x(i, j);
    s += row_w[i] * (std::log(1.0 + std::exp(z)) - y[i] * z);
    wsum += row_w[i];
  }
  return s / wsum;
}

// Central-difference gradient of logistic_loss; entry d is the intercept.
inline std::vector<double> finite_difference_gradient(const abandon::Matrix& x,
                                                      std::span<const int> y,
                                                      std::span<const double> row_w,
                                                      std::vector<double> w, double b,
                                                      double h = 1e-6) {
  std::vector<double> g(w.size() + 1);
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double orig = w[j];
    w[j] = orig + h;
    const double up = logistic_loss(x, y, row_w, w, b);
    w[j] = orig - h;
    const double down = logistic_loss(x, y, row_w, w, b);
    w[j] = orig;
    g[j] = (up - down) / (2 * h);
  }
  g[w.size()] = (logistic_loss(x, y, row_w, w, b + h) - logistic_loss(x, y, row_w, w, b - h)) /
                (2 * h);
  return g;
}

// Largest violation of the L1 optimality conditions given a gradient whose
// last entry is the (unpenalized) intercept.
inline double l1_kkt_violation(std::span<const double> w, std::span<const double> grad,
                               double lambda) {
  double worst = std::abs(grad[w.size()]);
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double v = w[j] == 0.0 ? std::max(0.0, std::abs(grad[j]) - lambda)
                                 : std::abs(grad[j] + lambda * (w[j] > 0 ? 1 : -1));
    worst = std::max(worst, v);
  }
  return worst;
}

struct BestSplit {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = -1.0;
};

// Exhaustive Gini split search: every feature and every midpoint between
// consecutive distinct values, unit weights.
inline BestSplit exhaustive_gini_split(const abandon::Matrix& x, std::span<const int> y) {
  auto gini = [](double pos, double n) {
    if (n == 0) return 0.0;
    const double p = pos / n;
    return 1.0 - p * p - (1 - p) * (1 - p);
  };
  const double n = static_cast<double>(y.size());
  const double pos = static_cast<double>(std::count(y.begin(), y.end(), 1));
  BestSplit best;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::vector<double> vals;
    for (std::size_t r = 0; r < x.rows(); ++r) vals.push_back(x(r, f));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
      const double t = 0.5 * (vals[k] + vals[k + 1]);
      double ln = 0, lp = 0;
      for (std::size_t r = 0; r < x.rows(); ++r)
        if (x(r, f) < t) {
          ln += 1;
          lp += y[r];
        }
      const double g = n * gini(pos, n) - ln * gini(lp, ln) - (n - ln) * gini(pos - lp, n - ln);
      if (g > best.gain + 1e-12) best = {f, t, g};
    }
  }
  return best;
}

// Fold-size multiset for n rows in k folds: n % k folds of ceil(n/k).
inline std::map<std::size_t, int> expected_fold_sizes(std::size_t n, int k) {
  std::map<std::size_t, int> out;
  const std::size_t base = n / static_cast<std::size_t>(k);
  const int big = static_cast<int>(n % static_cast<std::size_t>(k));
  if (big > 0) out[base + 1] = big;
  if (k - big > 0) out[base] = k - big;
  return out;
}

// Fill each missing cell with its column's observed mean.
inline abandon::Matrix column_mean_impute(const abandon::Matrix& x) {
  abandon::Matrix out = x;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double s = 0;
    int n = 0;
    for (std::size_t r = 0; r < x.rows(); ++r)
      if (!std::isnan(x(r, c))) {
        s += x(r, c);
        ++n;
      }
    for (std::size_t r = 0; r < x.rows(); ++r)
      if (std::isnan(x(r, c))) out(r, c) = s / n;
  }
  return out;
}

// RMSE over the cells that are missing in `masked`.
inline double masked_rmse(const abandon::Matrix& truth, const abandon::Matrix& masked,
                          const abandon::Matrix& filled) {
  double ss = 0;
  int n = 0;
  for (std::size_t r = 0; r < truth.rows(); ++r)
    for (std::size_t c = 0; c < truth.cols(); ++c)
      if (std::isnan(masked(r, c))) {
        const double d = filled(r, c) - truth(r, c);
        ss += d * d;
        ++n;
      }
  return std::sqrt(ss / n);
}

// Rows drawn from a one-factor model: column c = loading_c * z + noise.
inline abandon::Matrix correlated_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                                         double loading = 0.9) {
  std::normal_distribution<double> normal(0.0, 1.0);
  abandon::Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double z = normal(rng);
    for (std::size_t c = 0; c < cols; ++c)
      m(r, c) = (c + 1) * 10.0 + (c + 1) * (loading * z + std::sqrt(1 - loading * loading) * normal(rng));
  }
  return m;
}

// Standard deviation of a binomial proportion.
inline double binomial_sd(double p, double n) { return std::sqrt(p * (1 - p) / n); }

}  // namespace oracle

#endif  // ABANDON_TESTS_ORACLES_HPP_
