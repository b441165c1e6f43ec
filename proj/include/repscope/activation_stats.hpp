/*
 * Copyright 2026 The repscope Authors.
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

// Per-vector statistics of activation matrices: activation kurtosis and
// coordinate-level outlier features.
//
// Both operate on each row independently after standardizing it with its own
// mean and population standard deviation:
//
//   z_i(h) = (h_i - mu(h)) / sigma(h),  mu(h) = mean_i h_i,
//   sigma(h)^2 = mean_i (h_i - mu(h))^2
//
// Activation kurtosis is mean_n mean_i z_i(h^(n))^4 (about 3 for Gaussian
// rows, much larger when a few coordinates dominate).

#ifndef REPSCOPE_ACTIVATION_STATS_HPP_
#define REPSCOPE_ACTIVATION_STATS_HPP_

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "repscope/error.hpp"
#include "repscope/parallel.hpp"
#include "repscope/types.hpp"

namespace repscope {

/// Kurtosis values at or above this are flagged by the CLI as likely outlier
/// features. Callers of kurtosis() receive the raw value.
inline constexpr double kKurtosisAdvisoryThreshold = 5.0;
inline constexpr double kDefaultOutlierZ = 6.0;

struct KurtosisResult {
  double mean_kurtosis = 0.0;
  std::optional<std::vector<double>> per_sample;
  Index n_samples = 0;
  Index dim = 0;
};

struct OutlierFeatureReport {
  double threshold_z = kDefaultOutlierZ;
  std::vector<std::vector<Index>> outlier_coords;  // per sample, ascending
  std::vector<double> frequency;                   // per coordinate, in [0, 1]
};

struct RowMoments {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Mean and population standard deviation of one row. Throws DegenerateError
/// naming `row_index` when the row is constant (up to rounding).
template <typename RowExpr>
RowMoments row_moments(const RowExpr& row, Index row_index) {
  const auto d = static_cast<double>(row.size());
  const double mean = row.sum() / d;
  const double var = (row.array() - mean).square().sum() / d;
  const double stddev = std::sqrt(var);
  const double scale = row.cwiseAbs().maxCoeff();
  if (!(stddev > 64.0 * std::numeric_limits<double>::epsilon() * scale)) {
    throw DegenerateError("row " + std::to_string(row_index) +
                          " is constant (zero standard deviation); kurtosis is undefined");
  }
  return {mean, stddev};
}

inline KurtosisResult kurtosis(const ActivationMatrix& acts, bool keep_per_sample = false) {
  const Matrix& h = acts.data();
  if (h.cols() < 2) throw ValidationError("kurtosis needs d_H >= 2, got " + std::to_string(h.cols()));
  std::vector<double> per(static_cast<std::size_t>(h.rows()));
  parallel_for(per.size(), [&](std::size_t n) {
    const auto row = h.row(static_cast<Index>(n));
    const auto m = row_moments(row, static_cast<Index>(n));
    per[n] = ((row.array() - m.mean) / m.stddev).square().square().mean();
  });
  KurtosisResult out;
  double sum = 0.0;
  for (double k : per) sum += k;
  out.mean_kurtosis = sum / static_cast<double>(per.size());
  out.n_samples = h.rows();
  out.dim = h.cols();
  if (keep_per_sample) out.per_sample = std::move(per);
  return out;
}

namespace detail {

// Flags |z| >= threshold per row of `coords` (canonical or projected).
inline OutlierFeatureReport flag_outliers(const Matrix& coords, double threshold_z) {
  if (!(threshold_z > 0.0) || !std::isfinite(threshold_z)) {
    throw ValidationError("threshold_z must be a positive finite number");
  }
  if (coords.cols() < 2) {
    throw ValidationError("outlier detection needs at least 2 coordinates per row");
  }
  OutlierFeatureReport out;
  out.threshold_z = threshold_z;
  out.outlier_coords.resize(static_cast<std::size_t>(coords.rows()));
  parallel_for(out.outlier_coords.size(), [&](std::size_t n) {
    const auto row = coords.row(static_cast<Index>(n));
    const auto m = row_moments(row, static_cast<Index>(n));
    for (Index i = 0; i < row.size(); ++i) {
      if (std::abs(row[i] - m.mean) / m.stddev >= threshold_z) out.outlier_coords[n].push_back(i);
    }
  });
  out.frequency.assign(static_cast<std::size_t>(coords.cols()), 0.0);
  for (const auto& flagged : out.outlier_coords) {
    for (Index i : flagged) out.frequency[static_cast<std::size_t>(i)] += 1.0;
  }
  for (double& f : out.frequency) f /= static_cast<double>(coords.rows());
  return out;
}

}  // namespace detail

/// Flags coordinate i of sample n when |h_i - mu(h)| / sigma(h) >= threshold_z.
inline OutlierFeatureReport detect_outlier_features(const ActivationMatrix& acts,
                                                    double threshold_z = kDefaultOutlierZ) {
  return detail::flag_outliers(acts.data(), threshold_z);
}

}  // namespace repscope

#endif  // REPSCOPE_ACTIVATION_STATS_HPP_
