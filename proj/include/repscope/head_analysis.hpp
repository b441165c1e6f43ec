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

// Singular directions of a classification head and how much the encoder uses
// them.
//
// With W = sum_i s_i u_i v_i^T, the importance of right singular vector v_i is
//
//   Importance(i) = s_i / sum_j s_j  *  mean_n |cos(v_i, h^(n))|
//
// and the importance ratio is max_i Importance(i) / mean_i Importance(i).
// A direction whose importance dominates the mean is a privileged direction.

#ifndef REPSCOPE_HEAD_ANALYSIS_HPP_
#define REPSCOPE_HEAD_ANALYSIS_HPP_

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "repscope/activation_stats.hpp"
#include "repscope/error.hpp"
#include "repscope/parallel.hpp"
#include "repscope/types.hpp"
#include "repscope/zeroshot.hpp"

namespace repscope {

inline constexpr double kDefaultRankTol = 1e-10;
inline constexpr const char* kImportanceRatioDefinition = "max/mean";

struct SVDecomposition {
  Vector singular_values;  // descending, length r
  Matrix left_vectors;     // K x r
  Matrix right_vectors;    // d_H x r

  Index rank() const { return singular_values.size(); }

  Matrix reconstruct() const {
    return left_vectors * singular_values.asDiagonal() * right_vectors.transpose();
  }
};

struct ImportanceProfile {
  std::vector<double> importance;
  std::vector<double> head_share;     // s_i / sum_j s_j
  std::vector<double> encoder_share;  // mean_n |cos(v_i, h^(n))|
  double ratio = 1.0;
  Index argmax_index = 0;
};

/// Thin SVD of W. Singular values below rank_tol * s_1 are dropped. Each v_i
/// (and its u_i) is flipped so that its largest-magnitude entry, first one on
/// ties, is nonnegative.
inline SVDecomposition svd_head(const Matrix& weights, double rank_tol = kDefaultRankTol) {
  if (!(rank_tol >= 0.0 && rank_tol < 1.0)) {
    throw ValidationError("rank_tol must lie in [0, 1), got " + std::to_string(rank_tol));
  }
  if (!all_finite(weights)) throw ValidationError("head weights contain non-finite entries");
  if (weights.size() == 0 || weights.cwiseAbs().maxCoeff() == 0.0) {
    throw DegenerateError("head weights are all zero; SVD has no directions");
  }
  const Eigen::MatrixXd w = weights;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  Index r = 0;
  while (r < s.size() && !(s[r] < rank_tol * s[0])) ++r;

  SVDecomposition out;
  out.singular_values = s.head(r);
  out.left_vectors = svd.matrixU().leftCols(r);
  out.right_vectors = svd.matrixV().leftCols(r);
  for (Index i = 0; i < r; ++i) {
    Index pivot = 0;
    double best = -1.0;
    for (Index j = 0; j < out.right_vectors.rows(); ++j) {
      const double mag = std::abs(out.right_vectors(j, i));
      if (mag > best) {
        best = mag;
        pivot = j;
      }
    }
    if (out.right_vectors(pivot, i) < 0.0) {
      out.right_vectors.col(i) *= -1.0;
      out.left_vectors.col(i) *= -1.0;
    }
  }
  return out;
}

inline SVDecomposition svd_head(const ClassifierHead& head, double rank_tol = kDefaultRankTol) {
  return svd_head(head.weights(), rank_tol);
}

inline ImportanceProfile importance(const SVDecomposition& svd, const ActivationMatrix& acts) {
  const Index r = svd.rank();
  if (r < 1) throw DegenerateError("SVD has no directions");
  if (acts.dim() != svd.right_vectors.rows()) {
    throw ShapeError("activations have d_H=" + std::to_string(acts.dim()) +
                     " but right singular vectors have dimension " +
                     std::to_string(svd.right_vectors.rows()));
  }
  const Matrix unit = normalize_rows(acts.data());
  const Matrix cosines = unit * svd.right_vectors;  // N x r

  ImportanceProfile p;
  const double sigma_sum = svd.singular_values.sum();
  p.importance.resize(static_cast<std::size_t>(r));
  p.head_share.resize(static_cast<std::size_t>(r));
  p.encoder_share.resize(static_cast<std::size_t>(r));
  for (Index i = 0; i < r; ++i) {
    const auto k = static_cast<std::size_t>(i);
    p.head_share[k] = svd.singular_values[i] / sigma_sum;
    p.encoder_share[k] = cosines.col(i).cwiseAbs().sum() / static_cast<double>(cosines.rows());
    p.importance[k] = p.head_share[k] * p.encoder_share[k];
  }
  const auto max_it = std::max_element(p.importance.begin(), p.importance.end());
  p.argmax_index = static_cast<Index>(max_it - p.importance.begin());
  const double mean =
      std::accumulate(p.importance.begin(), p.importance.end(), 0.0) / static_cast<double>(r);
  if (mean == 0.0) throw DegenerateError("every importance score is zero");
  p.ratio = *max_it / mean;
  return p;
}

/// Same criterion as detect_outlier_features, applied to the coordinates of
/// each activation in the orthonormal basis given by the columns of
/// `directions` (d_H x m).
inline OutlierFeatureReport projection_outliers(const ActivationMatrix& acts, const Matrix& directions,
                                                double threshold_z = kDefaultOutlierZ) {
  if (directions.rows() != acts.dim()) {
    throw ShapeError("directions have dimension " + std::to_string(directions.rows()) +
                     ", activations have d_H=" + std::to_string(acts.dim()));
  }
  if (!all_finite(directions)) throw ValidationError("directions contain non-finite entries");
  const Matrix gram = directions.transpose() * directions;
  const double err = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (err > 1e-8) {
    throw ValidationError("direction columns are not orthonormal (max |D^T D - I| = " +
                          std::to_string(err) + ")");
  }
  const Matrix coords = acts.data() * directions;
  return detail::flag_outliers(coords, threshold_z);
}

namespace detail {

inline std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

/// Spearman rank correlation; tied values share their average rank.
inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("spearman inputs differ in length");
  if (x.size() < 2) throw ValidationError("spearman needs at least 2 points");
  const auto rx = detail::average_ranks(x);
  const auto ry = detail::average_ranks(y);
  const auto n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateError("spearman of a constant vector is undefined");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Singular-value pruning.

struct PruneSweepResult {
  std::vector<double> fractions;
  std::vector<Index> removed;          // directions zeroed at each fraction
  std::vector<double> acc_in;
  std::vector<std::vector<double>> acc_shift;  // [fraction][shift set]
  std::vector<double> mean_acc_shift;          // empty without shift sets
  std::vector<std::optional<double>> er;       // nullopt where ER is undefined
  Index rank = 0;
};

/// Number of directions removed at fraction p of rank r: floor(p * r), with a
/// small guard so that e.g. 0.29 * 100 counts as 29.
inline Index prune_count(double fraction, Index rank) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ValidationError("pruning fraction must lie in [0, 1], got " + std::to_string(fraction));
  }
  return std::min<Index>(rank, static_cast<Index>(std::floor(fraction * static_cast<double>(rank) + 1e-9)));
}

/// Order in which directions are pruned: ascending singular value, ties by
/// ascending original index.
inline std::vector<Index> prune_order(const SVDecomposition& svd) {
  std::vector<Index> order(static_cast<std::size_t>(svd.rank()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return svd.singular_values[a] < svd.singular_values[b];
  });
  return order;
}

/// W with its `count` least significant singular values set to zero. With
/// count = 0 the original weights are returned unchanged.
inline Matrix pruned_weights(const Matrix& weights, const SVDecomposition& svd, Index count) {
  if (count == 0) return weights;
  if (count >= svd.rank()) {
    throw DegenerateError("pruning " + std::to_string(count) + " of " + std::to_string(svd.rank()) +
                          " directions would zero the whole head");
  }
  Vector s = svd.singular_values;
  const auto order = prune_order(svd);
  for (Index k = 0; k < count; ++k) s[order[static_cast<std::size_t>(k)]] = 0.0;
  Matrix out = svd.left_vectors * s.asDiagonal() * svd.right_vectors.transpose();
  return out;
}

inline PruneSweepResult prune_sweep(const ClassifierHead& head, const ActivationMatrix& acts,
                                    std::span<const double> fractions,
                                    std::span<const ActivationMatrix> shift_sets = {},
                                    const std::optional<BaselineFit>& baseline = std::nullopt) {
  acts.require_labels(head.num_classes());
  for (const auto& s : shift_sets) s.require_labels(head.num_classes());
  if (fractions.empty()) throw ValidationError("no pruning fractions given");
  for (std::size_t f = 1; f < fractions.size(); ++f) {
    if (!(fractions[f] > fractions[f - 1])) {
      throw ValidationError("pruning fractions must be strictly ascending");
    }
  }
  // Full thin SVD: numerically null directions are kept so they are pruned first.
  const SVDecomposition svd = svd_head(head.weights(), 0.0);

  PruneSweepResult out;
  out.rank = svd.rank();
  out.fractions.assign(fractions.begin(), fractions.end());
  const std::size_t n = fractions.size();
  out.removed.resize(n);
  for (std::size_t f = 0; f < n; ++f) out.removed[f] = prune_count(fractions[f], svd.rank());
  out.acc_in.resize(n);
  out.acc_shift.assign(n, std::vector<double>(shift_sets.size()));
  if (!shift_sets.empty()) out.mean_acc_shift.resize(n);
  out.er.assign(n, std::nullopt);

  parallel_for(n, [&](std::size_t f) {
    const Matrix w = pruned_weights(head.weights(), svd, out.removed[f]);
    out.acc_in[f] = head_accuracy(w, acts);
    for (std::size_t s = 0; s < shift_sets.size(); ++s) {
      out.acc_shift[f][s] = head_accuracy(w, shift_sets[s]);
    }
    if (!shift_sets.empty()) {
      out.mean_acc_shift[f] = mean_shift_accuracy(out.acc_shift[f]);
      const double a = out.acc_in[f], b = out.mean_acc_shift[f];
      if (baseline && a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) {
        out.er[f] = effective_robustness(a, b, *baseline);
      }
    }
  });
  return out;
}

}  // namespace repscope

#endif  // REPSCOPE_HEAD_ANALYSIS_HPP_
