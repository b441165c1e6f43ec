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

// Writes the synthetic fixture bundles under tests/fixtures/. The output is
// committed; rerun only when the fixture design changes.
//
//   make_fixtures <out_dir> [seed]
//
// Two models share a head and differ only in one activation coordinate that
// lies in the null space of the head: "outlier" adds a large constant there,
// "plain" does not.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "repscope/io.hpp"
#include "repscope/types.hpp"

namespace {

using repscope::Matrix;
namespace fs = std::filesystem;

constexpr int kClasses = 10;
constexpr int kDim = 64;
constexpr int kNullCoord = 7;

Matrix gaussian(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = nd(rng);
  return m;
}

struct Labeled {
  Matrix acts;
  std::vector<std::int64_t> labels;
};

Labeled sample(std::mt19937_64& rng, const Matrix& prototypes, int n, double noise) {
  Labeled out{gaussian(rng, n, kDim, noise), {}};
  for (int i = 0; i < n; ++i) {
    const int y = i % kClasses;
    out.acts.row(i) += 3.0 * prototypes.row(y);
    out.labels.push_back(y);
  }
  return out;
}

void add_outlier(Matrix& acts) {
  for (int i = 0; i < acts.rows(); ++i) acts(i, kNullCoord) += 40.0;
}

void write_bundle(const fs::path& dir, bool outlier, const Matrix& head, const Labeled& in,
                  const std::vector<Labeled>& shifts, const Matrix& probe,
                  const nlohmann::json& manifest) {
  fs::create_directories(dir);
  repscope::io::Sidecar head_meta;
  head_meta.temperature = 0.01;
  repscope::io::save_matrix(dir / "head.npy", head, repscope::DType::kFloat32, head_meta);

  auto dump = [&](const std::string& file, Matrix m, const std::vector<std::int64_t>& labels,
                  const std::string& source) {
    if (outlier) add_outlier(m);
    repscope::io::Sidecar meta;
    if (!labels.empty()) meta.labels = labels;
    meta.layer_name = "last";
    meta.source_id = source;
    repscope::io::save_matrix(dir / file, m, repscope::DType::kFloat32, meta);
  };
  dump("acts.npy", in.acts, in.labels, "imagenet");
  nlohmann::json shift_files = nlohmann::json::array();
  for (std::size_t s = 0; s < shifts.size(); ++s) {
    const std::string file = "shift" + std::to_string(s) + ".npy";
    dump(file, shifts[s].acts, shifts[s].labels, "shift" + std::to_string(s));
    shift_files.push_back(file);
  }
  dump("probe.npy", probe, {}, "probe");
  repscope::io::write_text(dir / "concepts.json", manifest.dump(2) + "\n");

  const nlohmann::json bundle = {{"head", "head.npy"},
                                 {"head_is_text", true},
                                 {"acts", "acts.npy"},
                                 {"shift_acts", shift_files},
                                 {"probe_acts", "probe.npy"},
                                 {"probe_manifest", "concepts.json"},
                                 {"baselines", "../baselines.csv"},
                                 {"fractions", {0.0, 0.2, 0.4, 0.6, 0.8}},
                                 {"threshold", 0.9},
                                 {"z", 6.0},
                                 {"top_k", 3}};
  repscope::io::write_text(dir / "bundle.json", bundle.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_fixtures <out_dir> [seed]\n";
    return 2;
  }
  const fs::path out = argv[1];
  const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 20240601ULL;
  std::mt19937_64 rng(seed);

  // Unit prototypes with coordinate kNullCoord zeroed, so it is in ker(W).
  Matrix prototypes = gaussian(rng, kClasses, kDim);
  prototypes.col(kNullCoord).setZero();
  for (int k = 0; k < kClasses; ++k) prototypes.row(k).normalize();
  // Text embeddings: prototypes plus small noise off the null coordinate.
  Matrix text = prototypes + gaussian(rng, kClasses, kDim, 0.05);
  text.col(kNullCoord).setZero();

  const Labeled in = sample(rng, prototypes, 200, 1.0);
  std::vector<Labeled> shifts{sample(rng, prototypes, 200, 1.5), sample(rng, prototypes, 200, 2.0)};

  // Probe set: concept c positives carry prototype c, negatives do not.
  constexpr int kConcepts = 6, kPerSet = 10;
  Matrix probe = gaussian(rng, kConcepts * 2 * kPerSet, kDim);
  nlohmann::json concepts = nlohmann::json::array();
  for (int c = 0; c < kConcepts; ++c) {
    std::vector<int> pos, neg;
    for (int j = 0; j < kPerSet; ++j) {
      pos.push_back(c * 2 * kPerSet + j);
      neg.push_back(c * 2 * kPerSet + kPerSet + j);
      probe.row(pos.back()) += (c < 3 ? 4.0 : 1.0) * prototypes.row(c);
    }
    concepts.push_back({{"id", c}, {"name", "concept_" + std::to_string(c)}, {"pos", pos}, {"neg", neg}});
  }
  const nlohmann::json manifest = {{"concepts", concepts}};

  write_bundle(out / "outlier", true, text, in, shifts, probe, manifest);
  write_bundle(out / "plain", false, text, in, shifts, probe, manifest);

  // Baseline pool scattered around the reference line in logit space.
  std::ofstream csv(out / "baselines.csv");
  csv << "model_id,acc_in,acc_shift\n";
  std::normal_distribution<double> jitter(0.0, 0.05);
  for (int m = 0; m < 12; ++m) {
    const double acc_in = 0.55 + 0.03 * m;
    const double li = std::log(acc_in) - std::log1p(-acc_in);
    const double ls = 0.76 * li - 1.49 + jitter(rng);
    csv << "baseline_" << m << "," << acc_in << "," << 1.0 / (1.0 + std::exp(-ls)) << "\n";
  }
  std::cout << "fixtures written to " << out << "\n";
  return 0;
}
