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

// Zero-shot heads, top-1 accuracy and Effective Robustness.
//
// A zero-shot head stacks temperature-scaled unit text embeddings, so that
// logit_k(x) = cos(f(x), t_k) / tau. Effective Robustness is the vertical
// distance of a model above a line fitted in logit space to baseline models:
//
//   ER = acc_shift - logit^-1(beta1 * logit(acc_in) + beta0)

#ifndef REPSCOPE_ZEROSHOT_HPP_
#define REPSCOPE_ZEROSHOT_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "repscope/error.hpp"
#include "repscope/types.hpp"

namespace repscope {

struct BaselineFit {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double pearson_r = 0.0;
  Index n_points = 0;

  /// Fixed fit to the standard ImageNet baseline pool (slope .76,
  /// intercept -1.49), for reproduction runs without a baseline CSV.
  static BaselineFit reference() { return {-1.49, 0.76, 0.99, 0}; }
};

struct RobustnessMetrics {
  double er = 0.0;
  double pct_acc = 0.0;
  double acc_in = 0.0;
  double acc_shift = 0.0;
};

/// Rows of `text_embeddings` scaled to norm 1/temperature.
inline ClassifierHead build_head(const Matrix& text_embeddings, double temperature,
                                 std::vector<std::string> class_names = {}) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ValidationError("temperature must be positive, got " + std::to_string(temperature));
  }
  if (!all_finite(text_embeddings)) throw ValidationError("text embeddings contain non-finite entries");
  Matrix w(text_embeddings.rows(), text_embeddings.cols());
  for (Index k = 0; k < text_embeddings.rows(); ++k) {
    const double norm = text_embeddings.row(k).norm();
    if (norm == 0.0) {
      throw DegenerateError("text embedding row " + std::to_string(k) + " is zero");
    }
    w.row(k) = text_embeddings.row(k) / (norm * temperature);
  }
  return ClassifierHead(std::move(w), temperature, std::move(class_names));
}

/// Activation rows scaled to unit L2 norm. Zero rows are an error.
inline Matrix normalize_rows(const Matrix& h) {
  Matrix out(h.rows(), h.cols());
  for (Index n = 0; n < h.rows(); ++n) {
    const double norm = h.row(n).norm();
    if (norm == 0.0) {
      throw DegenerateError("activation row " + std::to_string(n) +
                            " is zero; its direction (cosine) is undefined");
    }
    out.row(n) = h.row(n) / norm;
  }
  return out;
}

/// N x K logits W f(x)/||f(x)|| for every activation row.
inline Matrix logits(const Matrix& weights, const ActivationMatrix& acts) {
  if (weights.cols() != acts.dim()) {
    throw ShapeError("head expects d_H=" + std::to_string(weights.cols()) +
                     " but activations have d_H=" + std::to_string(acts.dim()));
  }
  Matrix out = normalize_rows(acts.data()) * weights.transpose();
  return out;
}

inline Matrix logits(const ClassifierHead& head, const ActivationMatrix& acts) {
  return logits(head.weights(), acts);
}

/// Top-1 accuracy; argmax ties go to the lowest class index.
inline double accuracy(const Matrix& logit_matrix, std::span<const std::int64_t> labels) {
  if (static_cast<Index>(labels.size()) != logit_matrix.rows()) {
    throw ValidationError("labels length " + std::to_string(labels.size()) +
                          " does not match logit rows " + std::to_string(logit_matrix.rows()));
  }
  if (labels.empty()) throw ValidationError("accuracy of an empty set is undefined");
  std::size_t correct = 0;
  for (Index n = 0; n < logit_matrix.rows(); ++n) {
    const auto lab = labels[static_cast<std::size_t>(n)];
    if (lab < 0 || lab >= logit_matrix.cols()) {
      throw ValidationError("label " + std::to_string(lab) + " at row " + std::to_string(n) +
                            " is outside [0, " + std::to_string(logit_matrix.cols()) + ")");
    }
    Index best = 0;
    for (Index k = 1; k < logit_matrix.cols(); ++k) {
      if (logit_matrix(n, k) > logit_matrix(n, best)) best = k;
    }
    if (best == lab) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

/// Zero-shot accuracy of `weights` on a labeled activation matrix.
inline double head_accuracy(const Matrix& weights, const ActivationMatrix& acts) {
  const auto& labels = acts.require_labels(weights.rows());
  return accuracy(logits(weights, acts), labels);
}

inline void require_open_unit(double acc, const char* what) {
  if (!(acc > 0.0 && acc < 1.0)) {
    throw ValidationError(std::string(what) + " = " + std::to_string(acc) +
                          " must lie strictly inside (0, 1): logit is infinite at 0 and 1");
  }
}

/// ln(x) - ln(1 - x), for x in (0, 1).
inline double logit(double x) {
  require_open_unit(x, "accuracy");
  return std::log(x) - std::log1p(-x);
}

inline double inv_logit(double y) { return 1.0 / (1.0 + std::exp(-y)); }

/// Unweighted OLS of logit(acc_shift) on logit(acc_in).
inline BaselineFit fit_baseline(std::span<const AccuracyRecord> records) {
  if (records.size() < 2) {
    throw ValidationError("baseline fit needs at least 2 records, got " +
                          std::to_string(records.size()));
  }
  std::vector<double> x, y;
  x.reserve(records.size());
  y.reserve(records.size());
  for (const auto& r : records) {
    require_open_unit(r.acc_in, ("acc_in of '" + r.model_id + "'").c_str());
    require_open_unit(r.acc_shift, ("acc_shift of '" + r.model_id + "'").c_str());
    x.push_back(logit(r.acc_in));
    y.push_back(logit(r.acc_shift));
  }
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0, xmax = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
    xmax = std::max(xmax, std::abs(x[i]));
  }
  const double tiny = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, xmax);
  if (sxx <= n * tiny * tiny) {
    throw DegenerateError("baseline fit is singular: every acc_in is identical");
  }
  BaselineFit fit;
  fit.beta1 = sxy / sxx;
  fit.beta0 = my - fit.beta1 * mx;
  // A flat response has no defined correlation; report 0.
  fit.pearson_r = syy > 0.0 ? std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0) : 0.0;
  fit.n_points = static_cast<Index>(x.size());
  return fit;
}

inline double effective_robustness(double acc_in, double acc_shift, const BaselineFit& fit) {
  require_open_unit(acc_in, "acc_in");
  require_open_unit(acc_shift, "acc_shift");
  return acc_shift - inv_logit(fit.beta1 * logit(acc_in) + fit.beta0);
}

inline RobustnessMetrics robustness_metrics(double acc_in, double acc_shift, const BaselineFit& fit) {
  RobustnessMetrics m;
  m.er = effective_robustness(acc_in, acc_shift, fit);
  m.pct_acc = acc_shift / acc_in;
  m.acc_in = acc_in;
  m.acc_shift = acc_shift;
  return m;
}

/// Equal-weight mean of per-shift accuracies.
inline double mean_shift_accuracy(std::span<const double> per_shift) {
  if (per_shift.empty()) throw ValidationError("no shifted accuracies supplied");
  return std::accumulate(per_shift.begin(), per_shift.end(), 0.0) /
         static_cast<double>(per_shift.size());
}

}  // namespace repscope

#endif  // REPSCOPE_ZEROSHOT_HPP_
