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

// Linear centered kernel alignment.
//
//   HSIC(A, B) = ||B_c^T A_c||_F^2 / (N - 1)^2
//   CKA(A, B)  = HSIC(A, B) / sqrt(HSIC(A, A) HSIC(B, B))
//
// with A_c, B_c column-centered. Evaluated in feature space, O(N d^2).

#ifndef REPSCOPE_CKA_HPP_
#define REPSCOPE_CKA_HPP_

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "repscope/error.hpp"
#include "repscope/parallel.hpp"
#include "repscope/types.hpp"

namespace repscope {

inline constexpr const char* kCkaKernel = "linear";

struct CKAResult {
  double value = 0.0;
  Index n = 0;
  std::optional<std::pair<std::string, std::string>> layer_pair;
};

inline Matrix center_columns(const Matrix& x) {
  return x.rowwise() - x.colwise().mean();
}

/// Linear-kernel HSIC of two column-centered matrices.
inline double hsic_centered(const Matrix& a_c, const Matrix& b_c) {
  const double n1 = static_cast<double>(a_c.rows() - 1);
  return (b_c.transpose() * a_c).squaredNorm() / (n1 * n1);
}

inline double hsic(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ValidationError("HSIC inputs differ in sample count");
  if (a.rows() < 2) throw ValidationError("HSIC needs at least 2 samples");
  return hsic_centered(center_columns(a), center_columns(b));
}

inline CKAResult cka(const ActivationMatrix& a, const ActivationMatrix& b) {
  if (a.n_samples() != b.n_samples()) {
    throw ValidationError("CKA inputs differ in sample count: " + std::to_string(a.n_samples()) +
                          " vs " + std::to_string(b.n_samples()));
  }
  if (a.n_samples() < 2) throw ValidationError("CKA needs at least 2 samples");
  const Matrix ac = center_columns(a.data());
  const Matrix bc = center_columns(b.data());
  if (ac.squaredNorm() == 0.0) throw DegenerateError("first CKA input has constant features");
  if (bc.squaredNorm() == 0.0) throw DegenerateError("second CKA input has constant features");
  const double ab = hsic_centered(ac, bc);
  const double aa = hsic_centered(ac, ac);
  const double bb = hsic_centered(bc, bc);
  if (aa == 0.0 || bb == 0.0) throw DegenerateError("CKA self-similarity is zero");
  CKAResult out;
  out.value = ab / (std::sqrt(aa) * std::sqrt(bb));
  out.n = a.n_samples();
  if (!a.layer_name().empty() || !b.layer_name().empty()) {
    out.layer_pair = std::make_pair(a.layer_name(), b.layer_name());
  }
  return out;
}

/// CKA of each aligned layer pair, in layer order.
inline std::vector<CKAResult> cka_sweep(const std::vector<ActivationMatrix>& model_a_layers,
                                        const std::vector<ActivationMatrix>& model_b_layers) {
  if (model_a_layers.size() != model_b_layers.size()) {
    throw ValidationError("CKA sweep needs equal layer counts, got " +
                          std::to_string(model_a_layers.size()) + " and " +
                          std::to_string(model_b_layers.size()));
  }
  std::vector<CKAResult> out(model_a_layers.size());
  parallel_for(out.size(), [&](std::size_t l) {
    try {
      out[l] = cka(model_a_layers[l], model_b_layers[l]);
    } catch (const ValidationError& e) {
      throw ValidationError("layer " + std::to_string(l) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace repscope

#endif  // REPSCOPE_CKA_HPP_
