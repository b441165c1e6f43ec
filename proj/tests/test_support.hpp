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

// Helpers shared by the unit tests and the acceptance binary.

#ifndef REPSCOPE_TESTS_TEST_SUPPORT_HPP_
#define REPSCOPE_TESTS_TEST_SUPPORT_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "repscope/types.hpp"

namespace repscope::testing {

inline Matrix gaussian(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = nd(rng);
  return m;
}

/// Random orthogonal n x n matrix (Q factor of a Gaussian matrix).
inline Matrix random_orthogonal(std::mt19937_64& rng, Index n) {
  const Eigen::MatrixXd g = gaussian(rng, n, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return Matrix(qr.householderQ());
}

inline std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("repscope_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path fixtures() { return REPSCOPE_FIXTURES; }

}  // namespace repscope::testing

#endif  // REPSCOPE_TESTS_TEST_SUPPORT_HPP_
