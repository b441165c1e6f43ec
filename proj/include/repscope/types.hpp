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

// Core in-memory data model. Every matrix is held in 64-bit floating point,
// row-major, regardless of the precision it was stored with on disk.

#ifndef REPSCOPE_TYPES_HPP_
#define REPSCOPE_TYPES_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "repscope/error.hpp"

namespace repscope {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// On-disk element type of an NPY array.
enum class DType { kFloat32, kFloat64 };

inline bool all_finite(const double* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(data[i])) return false;
  }
  return true;
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.derived().array().isFinite().all();
}

/// N x d_H matrix of encoder outputs, one activation vector per row.
class ActivationMatrix {
 public:
  ActivationMatrix() = default;

  explicit ActivationMatrix(Matrix data,
                            std::optional<std::vector<std::int64_t>> labels = std::nullopt,
                            std::string layer_name = {}, std::string source_id = {})
      : data_(std::move(data)),
        labels_(std::move(labels)),
        layer_name_(std::move(layer_name)),
        source_id_(std::move(source_id)) {
    if (data_.rows() < 1 || data_.cols() < 1) {
      throw ShapeError("activation matrix must have at least one row and one column, got " +
                       std::to_string(data_.rows()) + "x" + std::to_string(data_.cols()));
    }
    if (!all_finite(data_)) throw ValidationError("activation matrix has non-finite entries");
    if (labels_) {
      if (static_cast<Index>(labels_->size()) != data_.rows()) {
        throw ValidationError("labels length " + std::to_string(labels_->size()) +
                              " does not match N=" + std::to_string(data_.rows()));
      }
      for (std::size_t n = 0; n < labels_->size(); ++n) {
        if ((*labels_)[n] < 0) {
          throw ValidationError("negative label at row " + std::to_string(n));
        }
      }
    }
  }

  const Matrix& data() const { return data_; }
  Index n_samples() const { return data_.rows(); }
  Index dim() const { return data_.cols(); }
  const std::optional<std::vector<std::int64_t>>& labels() const { return labels_; }
  bool has_labels() const { return labels_.has_value(); }
  const std::string& layer_name() const { return layer_name_; }
  const std::string& source_id() const { return source_id_; }

  /// Throws unless labels exist and every label is in [0, num_classes).
  const std::vector<std::int64_t>& require_labels(Index num_classes) const {
    if (!labels_) throw ValidationError("activation matrix '" + source_id_ + "' is unlabeled");
    for (std::size_t n = 0; n < labels_->size(); ++n) {
      if ((*labels_)[n] >= num_classes) {
        throw ValidationError("label " + std::to_string((*labels_)[n]) + " at row " +
                              std::to_string(n) + " is outside [0, " +
                              std::to_string(num_classes) + ")");
      }
    }
    return *labels_;
  }

 private:
  Matrix data_;
  std::optional<std::vector<std::int64_t>> labels_;
  std::string layer_name_;
  std::string source_id_;
};

/// K x d_H linear classification head W.
class ClassifierHead {
 public:
  ClassifierHead() = default;

  explicit ClassifierHead(Matrix weights, std::optional<double> temperature = std::nullopt,
                          std::vector<std::string> class_names = {})
      : weights_(std::move(weights)),
        temperature_(temperature),
        class_names_(std::move(class_names)) {
    if (weights_.rows() < 2 || weights_.cols() < 1) {
      throw ShapeError("classifier head needs K >= 2 classes and d_H >= 1, got " +
                       std::to_string(weights_.rows()) + "x" + std::to_string(weights_.cols()));
    }
    if (!all_finite(weights_)) throw ValidationError("classifier head has non-finite entries");
    if (temperature_ && !(*temperature_ > 0.0)) {
      throw ValidationError("temperature must be positive");
    }
    if (!class_names_.empty() && static_cast<Index>(class_names_.size()) != weights_.rows()) {
      throw ValidationError("class_names length does not match K");
    }
  }

  const Matrix& weights() const { return weights_; }
  Index num_classes() const { return weights_.rows(); }
  Index dim() const { return weights_.cols(); }
  const std::optional<double>& temperature() const { return temperature_; }
  const std::vector<std::string>& class_names() const { return class_names_; }

 private:
  Matrix weights_;
  std::optional<double> temperature_;
  std::vector<std::string> class_names_;
};

/// Dense tensor of arbitrary rank, C order.
struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<double> values;
  DType dtype = DType::kFloat64;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto s : shape) n *= static_cast<std::size_t>(s);
    return n;
  }
};

/// Named tensors of one checkpoint. std::map keeps names unique and ordered.
using CheckpointTensorMap = std::map<std::string, Tensor>;

struct Concept {
  std::int64_t id = 0;
  std::string name;
  std::vector<std::int64_t> positive;
  std::vector<std::int64_t> negative;
};

/// Balanced concept sets over the rows of one probe activation matrix.
struct ConceptManifest {
  std::vector<Concept> concepts;

  /// Checks balance, disjointness and bounds against a probe matrix of
  /// `num_rows` rows.
  void validate(Index num_rows) const {
    for (const auto& c : concepts) {
      const std::string tag = "concept " + std::to_string(c.id) + " ('" + c.name + "')";
      if (c.positive.empty() || c.negative.empty()) {
        throw ValidationError(tag + " has an empty positive or negative set");
      }
      if (c.positive.size() != c.negative.size()) {
        throw ValidationError(tag + " is unbalanced: " + std::to_string(c.positive.size()) +
                              " positives vs " + std::to_string(c.negative.size()) +
                              " negatives");
      }
      std::vector<std::int64_t> pos = c.positive;
      std::sort(pos.begin(), pos.end());
      for (auto idx : c.positive) {
        if (idx < 0 || idx >= num_rows) {
          throw ValidationError(tag + " index " + std::to_string(idx) + " out of bounds");
        }
      }
      for (auto idx : c.negative) {
        if (idx < 0 || idx >= num_rows) {
          throw ValidationError(tag + " index " + std::to_string(idx) + " out of bounds");
        }
        if (std::binary_search(pos.begin(), pos.end(), idx)) {
          throw ValidationError(tag + " index " + std::to_string(idx) +
                                " is both positive and negative");
        }
      }
    }
  }
};

/// In-distribution and mean shifted accuracy of one model.
struct AccuracyRecord {
  std::string model_id;
  double acc_in = 0.0;
  double acc_shift = 0.0;
  std::map<std::string, double> per_shift;
};

}  // namespace repscope

#endif  // REPSCOPE_TYPES_HPP_
