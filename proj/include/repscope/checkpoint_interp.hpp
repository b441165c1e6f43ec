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

// Weight-space interpolation between two checkpoints,
// theta_alpha = (1 - alpha) * theta0 + alpha * theta1, and merging of the
// per-alpha reports into one table.

#ifndef REPSCOPE_CHECKPOINT_INTERP_HPP_
#define REPSCOPE_CHECKPOINT_INTERP_HPP_

#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "repscope/error.hpp"
#include "repscope/parallel.hpp"
#include "repscope/report.hpp"
#include "repscope/types.hpp"

namespace repscope {

struct InterpolationSpec {
  double alpha = 0.0;
  std::string theta0_id;
  std::string theta1_id;
};

/// Default alpha grid: 0.0, 0.1, ..., 1.0.
inline std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

inline CheckpointTensorMap interpolate(const CheckpointTensorMap& theta0, const CheckpointTensorMap& theta1,
                                       double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
  std::vector<std::string> only0, only1;
  for (const auto& [name, t] : theta0) {
    if (!theta1.count(name)) only0.push_back(name);
  }
  for (const auto& [name, t] : theta1) {
    if (!theta0.count(name)) only1.push_back(name);
  }
  if (!only0.empty() || !only1.empty()) {
    std::string msg = "checkpoints have different tensor names;";
    for (const auto& n : only0) msg += " only in theta0: '" + n + "'";
    for (const auto& n : only1) msg += " only in theta1: '" + n + "'";
    throw ConsistencyError(msg);
  }
  std::vector<std::pair<const std::string*, std::pair<const Tensor*, const Tensor*>>> jobs;
  for (const auto& [name, t0] : theta0) {
    const Tensor& t1 = theta1.at(name);
    if (t0.shape != t1.shape) throw ConsistencyError("tensor '" + name + "' has mismatched shapes");
    jobs.push_back({&name, {&t0, &t1}});
  }
  std::vector<Tensor> results(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    const Tensor& a = *jobs[j].second.first;
    const Tensor& b = *jobs[j].second.second;
    Tensor t;
    t.shape = a.shape;
    t.dtype = a.dtype;
    t.values.resize(a.values.size());
    const double keep = 1.0 - alpha;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      t.values[i] = keep * a.values[i] + alpha * b.values[i];
    }
    results[j] = std::move(t);
  });
  CheckpointTensorMap out;
  for (std::size_t j = 0; j < jobs.size(); ++j) out.emplace(*jobs[j].first, std::move(results[j]));
  return out;
}

/// One row per alpha, one column per scalar metric shared by every report.
/// Alphas must be strictly increasing.
inline ReportDocument sweep_report(const std::vector<std::pair<double, ReportDocument>>& per_alpha) {
  if (per_alpha.empty()) throw ValidationError("sweep report needs at least one alpha");
  for (std::size_t i = 1; i < per_alpha.size(); ++i) {
    if (per_alpha[i].first == per_alpha[i - 1].first) {
      throw ValidationError("duplicate alpha " + std::to_string(per_alpha[i].first));
    }
    if (per_alpha[i].first < per_alpha[i - 1].first) {
      throw ValidationError("alphas must be strictly increasing");
    }
  }
  auto scalar_names = [](const ReportDocument& r) {
    std::set<std::string> names;
    for (const auto& [name, m] : r.metrics) {
      if (std::holds_alternative<double>(m)) names.insert(name);
    }
    return names;
  };
  const std::set<std::string> columns = scalar_names(per_alpha.front().second);
  for (const auto& [alpha, report] : per_alpha) {
    const auto names = scalar_names(report);
    if (names != columns) {
      std::string msg = "alpha " + std::to_string(alpha) + " has a different metric set;";
      for (const auto& n : columns) {
        if (!names.count(n)) msg += " missing '" + n + "'";
      }
      for (const auto& n : names) {
        if (!columns.count(n)) msg += " unexpected '" + n + "'";
      }
      throw ValidationError(msg);
    }
  }
  if (columns.empty()) throw ValidationError("reports share no scalar metrics");

  Table table;
  table.columns.push_back("alpha");
  table.columns.insert(table.columns.end(), columns.begin(), columns.end());
  ReportDocument out;
  for (const auto& [alpha, report] : per_alpha) {
    std::vector<Cell> row{alpha};
    for (const auto& name : columns) row.emplace_back(report.scalar(name));
    table.add_row(std::move(row));
    for (const auto& in : report.inputs) {
      bool seen = false;
      for (const auto& mine : out.inputs) seen = seen || mine == in;
      if (!seen) out.inputs.push_back(in);
    }
  }
  out.add("alpha_sweep", std::move(table));
  return out;
}

}  // namespace repscope

#endif  // REPSCOPE_CHECKPOINT_INTERP_HPP_
