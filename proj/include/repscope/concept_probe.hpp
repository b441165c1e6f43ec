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

// Concept probing of representation directions.
//
// A direction v encodes concept c when projecting the concept's positive and
// negative images onto v separates them, measured by average precision. The
// sign of a singular vector is arbitrary, so each direction is scored with
// max(AP(v^T h), AP(-v^T h)).

#ifndef REPSCOPE_CONCEPT_PROBE_HPP_
#define REPSCOPE_CONCEPT_PROBE_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "repscope/error.hpp"
#include "repscope/head_analysis.hpp"
#include "repscope/parallel.hpp"
#include "repscope/types.hpp"

namespace repscope {

inline constexpr double kDefaultApThreshold = 0.9;

using ConceptSet = std::set<std::int64_t>;

struct ConceptProbeResult {
  Matrix ap;  // directions x concepts
  double threshold = kDefaultApThreshold;
  std::vector<std::int64_t> concept_ids;
  std::vector<std::string> concept_names;
  std::vector<std::vector<std::int64_t>> assigned;  // per direction, ascending ids
};

struct ConceptSummary {
  std::size_t n_unique = 0;
  double polysemanticity = 0.0;
  std::vector<std::vector<std::pair<std::int64_t, double>>> top_k;  // per direction
};

struct VennPartition {
  std::vector<std::string> set_names;
  // Bit j of the key is set when the region lies inside set j. Every nonempty
  // signature is present, including empty regions.
  std::map<unsigned, std::size_t> region_sizes;

  std::string region_name(unsigned mask) const {
    std::string out;
    for (std::size_t j = 0; j < set_names.size(); ++j) {
      if (mask & (1u << j)) {
        if (!out.empty()) out += "&";
        out += set_names[j];
      }
    }
    return out;
  }

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& [mask, size] : region_sizes) n += size;
    return n;
  }
};

struct OverlapEpoch {
  std::size_t fine_size = 0;
  // Fractions of the epoch's fine set: fine only, fine&zero only,
  // fine&sup only, fine&zero&sup. Empty when fine_size == 0.
  std::optional<std::array<double, 4>> fractions;
  std::string error;
};

/// Non-interpolated average precision: mean over positives of precision at
/// the positive's rank. Scores are ranked descending, ties by ascending index.
inline double average_precision(std::span<const double> scores, const std::vector<bool>& is_positive) {
  if (scores.size() != is_positive.size()) {
    throw ValidationError("scores and labels differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (is_positive[order[k]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  if (hits == 0) throw ValidationError("average precision is undefined without positives");
  return sum / static_cast<double>(hits);
}

/// Thresholds an AP matrix into per-direction concept assignments.
inline std::vector<std::vector<std::int64_t>> assign_concepts(const Matrix& ap,
                                                             const std::vector<std::int64_t>& ids,
                                                             double threshold) {
  std::vector<std::vector<std::int64_t>> out(static_cast<std::size_t>(ap.rows()));
  for (Index i = 0; i < ap.rows(); ++i) {
    for (Index c = 0; c < ap.cols(); ++c) {
      if (ap(i, c) >= threshold) out[static_cast<std::size_t>(i)].push_back(ids[static_cast<std::size_t>(c)]);
    }
    std::sort(out[static_cast<std::size_t>(i)].begin(), out[static_cast<std::size_t>(i)].end());
  }
  return out;
}

/// AP of every (direction, concept) pair for the columns of `directions`
/// (d_H x m). Scores for concept c are the projections of its positives, then
/// its negatives, in manifest order.
inline ConceptProbeResult probe_directions(const Matrix& directions, const ActivationMatrix& probe_acts,
                                           const ConceptManifest& manifest,
                                           double threshold = kDefaultApThreshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ValidationError("AP threshold must lie in (0, 1], got " + std::to_string(threshold));
  }
  if (directions.rows() != probe_acts.dim()) {
    throw ShapeError("directions have dimension " + std::to_string(directions.rows()) +
                     ", probe activations have d_H=" + std::to_string(probe_acts.dim()));
  }
  if (manifest.concepts.empty()) throw ValidationError("concept manifest is empty");
  manifest.validate(probe_acts.n_samples());

  const Matrix proj = probe_acts.data() * directions;  // N x m
  const auto n_concepts = manifest.concepts.size();
  ConceptProbeResult out;
  out.threshold = threshold;
  out.ap.resize(directions.cols(), static_cast<Index>(n_concepts));
  for (const auto& c : manifest.concepts) {
    out.concept_ids.push_back(c.id);
    out.concept_names.push_back(c.name);
  }
  const std::size_t pairs = static_cast<std::size_t>(directions.cols()) * n_concepts;
  parallel_for(pairs, [&](std::size_t job) {
    const auto i = static_cast<Index>(job / n_concepts);
    const auto& c = manifest.concepts[job % n_concepts];
    std::vector<double> scores, flipped;
    std::vector<bool> positive;
    for (auto idx : c.positive) {
      scores.push_back(proj(idx, i));
      positive.push_back(true);
    }
    for (auto idx : c.negative) {
      scores.push_back(proj(idx, i));
      positive.push_back(false);
    }
    flipped.reserve(scores.size());
    for (double s : scores) flipped.push_back(-s);
    out.ap(i, static_cast<Index>(job % n_concepts)) =
        std::max(average_precision(scores, positive), average_precision(flipped, positive));
  });
  out.assigned = assign_concepts(out.ap, out.concept_ids, threshold);
  return out;
}

/// Probes the right singular vectors of a head.
inline ConceptProbeResult probe(const SVDecomposition& svd, const ActivationMatrix& probe_acts,
                                const ConceptManifest& manifest,
                                double threshold = kDefaultApThreshold) {
  return probe_directions(svd.right_vectors, probe_acts, manifest, threshold);
}

inline ConceptProbeResult rethreshold(ConceptProbeResult result, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ValidationError("AP threshold must lie in (0, 1], got " + std::to_string(threshold));
  }
  result.threshold = threshold;
  result.assigned = assign_concepts(result.ap, result.concept_ids, threshold);
  return result;
}

inline ConceptSummary summarize(const ConceptProbeResult& result, std::size_t k = 3) {
  if (k < 1) throw ValidationError("top-k needs k >= 1");
  ConceptSummary s;
  ConceptSet unique;
  std::size_t total = 0;
  for (const auto& a : result.assigned) {
    unique.insert(a.begin(), a.end());
    total += a.size();
  }
  s.n_unique = unique.size();
  s.polysemanticity = result.assigned.empty()
                          ? 0.0
                          : static_cast<double>(total) / static_cast<double>(result.assigned.size());
  for (Index i = 0; i < result.ap.rows(); ++i) {
    std::vector<std::pair<std::int64_t, double>> ranked;
    for (Index c = 0; c < result.ap.cols(); ++c) {
      ranked.emplace_back(result.concept_ids[static_cast<std::size_t>(c)], result.ap(i, c));
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    ranked.resize(std::min(k, ranked.size()));
    s.top_k.push_back(std::move(ranked));
  }
  return s;
}

/// Region sizes of the Venn diagram of 2 or 3 named sets.
inline VennPartition venn(const std::vector<std::pair<std::string, ConceptSet>>& sets) {
  if (sets.size() < 2 || sets.size() > 3) {
    throw ValidationError("venn needs 2 or 3 sets, got " + std::to_string(sets.size()));
  }
  VennPartition out;
  for (const auto& [name, s] : sets) out.set_names.push_back(name);
  const unsigned full = (1u << sets.size()) - 1;
  for (unsigned mask = 1; mask <= full; ++mask) out.region_sizes[mask] = 0;
  std::map<std::int64_t, unsigned> membership;
  for (std::size_t j = 0; j < sets.size(); ++j) {
    for (auto id : sets[j].second) membership[id] |= 1u << j;
  }
  for (const auto& [id, mask] : membership) ++out.region_sizes[mask];
  return out;
}

/// For each epoch, how the finetuned concept set splits across the zero-shot
/// and supervised sets, as fractions of the epoch's fine set size.
inline std::vector<OverlapEpoch> overlap_trajectory(const std::vector<ConceptSet>& fine_sets,
                                                    const ConceptSet& zero_set,
                                                    const ConceptSet& sup_set) {
  if (fine_sets.empty()) throw ValidationError("overlap trajectory needs at least one epoch");
  std::vector<OverlapEpoch> out;
  for (std::size_t e = 0; e < fine_sets.size(); ++e) {
    OverlapEpoch ep;
    ep.fine_size = fine_sets[e].size();
    if (ep.fine_size == 0) {
      ep.error = "epoch " + std::to_string(e) + ": fine concept set is empty, fractions undefined";
      out.push_back(std::move(ep));
      continue;
    }
    std::array<std::size_t, 4> counts{};
    for (auto id : fine_sets[e]) {
      const unsigned slot = (zero_set.count(id) ? 1u : 0u) | (sup_set.count(id) ? 2u : 0u);
      ++counts[slot];
    }
    std::array<double, 4> frac{};
    for (std::size_t j = 0; j < 4; ++j) {
      frac[j] = static_cast<double>(counts[j]) / static_cast<double>(ep.fine_size);
    }
    ep.fractions = frac;
    out.push_back(std::move(ep));
  }
  return out;
}

}  // namespace repscope

#endif  // REPSCOPE_CONCEPT_PROBE_HPP_
