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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Tolerances are fixed here, not tuned.

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

#include "repscope/cli.hpp"
#include "repscope/repscope.hpp"
#include "test_support.hpp"

namespace {

using namespace repscope;
using testing::gaussian;
using testing::uniform_int;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

template <typename Fn>
double seconds(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Verdict gaussian_kurtosis() {
  std::mt19937_64 rng(101);
  const ActivationMatrix acts(gaussian(rng, 10000, 512));
  KurtosisResult k;
  const double t = seconds([&] { k = kurtosis(acts); });
  Verdict v;
  v.require(std::abs(k.mean_kurtosis - 3.0) <= 0.1, "mean kurtosis " + fmt(k.mean_kurtosis));
  v.require(t < 1.0, "runtime " + fmt(t) + " s");
  if (v.pass) v.detail = "K=" + fmt(k.mean_kurtosis) + " in " + fmt(t) + " s";
  return v;
}

Verdict outlier_sensitivity() {
  std::mt19937_64 rng(102);
  const Index n = 2000, d = 512, coord = 137;
  Matrix h = gaussian(rng, n, d);
  for (Index r = 0; r < n; ++r) {
    const double mean = h.row(r).mean();
    const double sd = std::sqrt((h.row(r).array() - mean).square().mean());
    h(r, coord) = 20.0 * sd;
  }
  const ActivationMatrix acts(h);
  const double k = kurtosis(acts).mean_kurtosis;
  const auto rep = detect_outlier_features(acts, 6.0);
  Verdict v;
  v.require(k > 10.0, "mean kurtosis " + fmt(k));
  for (Index i = 0; i < d; ++i) {
    const double f = rep.frequency[static_cast<std::size_t>(i)];
    v.require(i == coord ? f == 1.0 : f == 0.0, "coordinate " + std::to_string(i) + " frequency " + fmt(f));
  }
  if (v.pass) v.detail = "K=" + fmt(k) + ", only coordinate 137 flagged, frequency 1";
  return v;
}

Verdict svd_contract() {
  std::mt19937_64 rng(103);
  Verdict v;
  double worst_rec = 0, worst_orth = 0, worst_sigma = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix w = gaussian(rng, 64, 128);
    const auto svd = svd_head(w);
    const double rec = (svd.reconstruct() - w).norm() / w.norm();
    const Matrix vtv = svd.right_vectors.transpose() * svd.right_vectors;
    const Matrix utu = svd.left_vectors.transpose() * svd.left_vectors;
    const double orth = std::max((vtv - Matrix::Identity(vtv.rows(), vtv.cols())).cwiseAbs().maxCoeff(),
                                 (utu - Matrix::Identity(utu.rows(), utu.cols())).cwiseAbs().maxCoeff());
    // Oracle: eigenvalues of W^T W, largest 64.
    const Eigen::MatrixXd gram = w.transpose() * w;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.rbegin(), ev.rend());
    double sig = 0.0;
    v.require(svd.rank() == 64, "rank " + std::to_string(svd.rank()));
    for (Index i = 0; i < std::min<Index>(svd.rank(), 64); ++i) {
      sig = std::max(sig, std::abs(svd.singular_values[i] - std::sqrt(std::max(0.0, ev[static_cast<std::size_t>(i)]))));
    }
    worst_rec = std::max(worst_rec, rec);
    worst_orth = std::max(worst_orth, orth);
    worst_sigma = std::max(worst_sigma, sig);
  }
  v.require(worst_rec <= 1e-10, "reconstruction error " + fmt(worst_rec));
  v.require(worst_orth <= 1e-10, "orthonormality error " + fmt(worst_orth));
  v.require(worst_sigma <= 1e-8, "singular value error " + fmt(worst_sigma));
  if (v.pass) {
    v.detail = "100 heads; max rec " + fmt(worst_rec) + ", orth " + fmt(worst_orth) + ", sigma " + fmt(worst_sigma);
  }
  return v;
}

Verdict importance_oracle() {
  std::mt19937_64 rng(104);
  Verdict v;
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index k = uniform_int(rng, 2, 8), d = uniform_int(rng, 2, 16), n = uniform_int(rng, 1, 32);
    const Matrix w = gaussian(rng, k, d);
    const Matrix h = gaussian(rng, n, d);
    const auto svd = svd_head(w);
    const auto p = importance(svd, ActivationMatrix(h));
    double sigma_sum = 0;
    for (Index i = 0; i < svd.rank(); ++i) sigma_sum += svd.singular_values[i];
    double mx = -1, sum = 0;
    for (Index i = 0; i < svd.rank(); ++i) {
      double acc = 0;
      for (Index r = 0; r < n; ++r) {
        double dot = 0, norm = 0;
        for (Index j = 0; j < d; ++j) {
          dot += svd.right_vectors(j, i) * h(r, j);
          norm += h(r, j) * h(r, j);
        }
        acc += std::abs(dot) / std::sqrt(norm);
      }
      const double expected = svd.singular_values[i] / sigma_sum * acc / static_cast<double>(n);
      worst = std::max(worst, std::abs(expected - p.importance[static_cast<std::size_t>(i)]));
      mx = std::max(mx, expected);
      sum += expected;
    }
    const double ratio = mx / (sum / static_cast<double>(svd.rank()));
    v.require(std::abs(p.ratio - ratio) <= 1e-12 * ratio, "ratio is not max/mean on instance " + std::to_string(trial));
    const auto scaled = importance(svd_head(Matrix(w * 3.7)), ActivationMatrix(Matrix(h * 0.05)));
    v.require(scaled.argmax_index == p.argmax_index, "argmax moved under rescaling on instance " + std::to_string(trial));
  }
  v.require(worst <= 1e-12, "max deviation " + fmt(worst));
  if (v.pass) v.detail = "50 instances, max deviation " + fmt(worst) + ", ratio=max/mean, argmax scale-invariant";
  return v;
}

Verdict pruning() {
  std::mt19937_64 rng(105);
  Verdict v;
  // p = 0 is bitwise.
  {
    const Matrix w = gaussian(rng, 10, 40);
    const ActivationMatrix acts(gaussian(rng, 100, 40));
    const auto svd = svd_head(w, 0.0);
    const Matrix a = logits(w, acts);
    const Matrix b = logits(pruned_weights(w, svd, prune_count(0.0, svd.rank())), acts);
    v.require(a == b, "p=0 logits differ");
  }
  // Exact rank 5 in a 20 x 64 head: the other 15 directions are below tolerance.
  double below_tol_change = 0;
  {
    const Matrix w = gaussian(rng, 20, 5) * gaussian(rng, 5, 64);
    const ActivationMatrix acts(gaussian(rng, 200, 64));
    const auto full = svd_head(w, 0.0);
    const Index below = full.rank() - svd_head(w).rank();
    v.require(below == 15, "expected 15 below-tolerance directions, got " + std::to_string(below));
    below_tol_change = (logits(pruned_weights(w, full, below), acts) - logits(w, acts)).cwiseAbs().maxCoeff();
    v.require(below_tol_change <= 1e-9, "below-tolerance pruning changed a logit by " + fmt(below_tol_change));
  }
  // Rank-5 signal plus small noise, K = 50, d = 512.
  double acc0 = 0, acc8 = 0;
  {
    const Index k = 50, d = 512, n = 2000;
    Matrix signal = gaussian(rng, k, 5) * gaussian(rng, 5, d);
    signal.rowwise().normalize();
    const Matrix w = signal + gaussian(rng, k, d, 1e-3);
    Matrix h = gaussian(rng, n, d, 0.05);
    std::vector<std::int64_t> labels;
    for (Index i = 0; i < n; ++i) {
      labels.push_back(i % k);
      h.row(i) += signal.row(i % k) / signal.row(i % k).norm();
    }
    const ClassifierHead head(w);
    const auto r = prune_sweep(head, ActivationMatrix(h, labels), std::vector<double>{0.0, 0.8});
    acc0 = r.acc_in[0];
    acc8 = r.acc_in[1];
    v.require(r.removed[1] == 40, "p=0.8 removed " + std::to_string(r.removed[1]));
    v.require(std::abs(acc8 - acc0) <= 0.01, "accuracy " + fmt(acc0) + " -> " + fmt(acc8));
  }
  if (v.pass) {
    v.detail = "p=0 bitwise; below-tol change " + fmt(below_tol_change) + "; rank-5 acc " + fmt(acc0) + " -> " +
               fmt(acc8) + " at p=0.8";
  }
  return v;
}

Verdict effective_robustness_check() {
  Verdict v;
  std::vector<AccuracyRecord> pool;
  for (int i = 0; i < 25; ++i) {
    const double a = 0.05 + 0.9 * i / 24.0;
    pool.push_back({"m" + std::to_string(i), a, inv_logit(0.76 * logit(a) - 1.49), {}});
  }
  const auto fit = fit_baseline(pool);
  v.require(std::abs(fit.beta1 - 0.76) <= 1e-10, "beta1 " + fmt(fit.beta1));
  v.require(std::abs(fit.beta0 + 1.49) <= 1e-10, "beta0 " + fmt(fit.beta0));
  v.require(std::abs(fit.pearson_r - 1.0) <= 1e-12, "pearson_r " + fmt(fit.pearson_r));
  double worst = 0;
  for (const auto& r : pool) worst = std::max(worst, std::abs(effective_robustness(r.acc_in, r.acc_shift, fit)));
  v.require(worst <= 1e-12, "on-line ER " + fmt(worst));
  const double er = effective_robustness(0.60, 0.44, BaselineFit::reference());
  v.require(std::abs(er - 0.2052796501413293147) <= 1e-12, "ER(0.60, 0.44) = " + fmt(er));
  if (v.pass) v.detail = "line recovered, max on-line |ER| " + fmt(worst) + ", ER(0.60,0.44)=" + fmt(er);
  return v;
}

double brute_ap(const std::vector<double>& s, const std::vector<bool>& pos) {
  double total = 0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!pos[i]) continue;
    ++n_pos;
    std::size_t rank = 1, hits = 1;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j != i && (s[j] > s[i] || (s[j] == s[i] && j < i))) {
        ++rank;
        hits += pos[j] ? 1 : 0;
      }
    }
    total += static_cast<double>(hits) / static_cast<double>(rank);
  }
  return total / static_cast<double>(n_pos);
}

Verdict average_precision_check() {
  std::mt19937_64 rng(106);
  Verdict v;
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(uniform_int(rng, 2, 60));
    std::vector<double> s(n);
    std::vector<bool> pos(n);
    const bool ties = trial % 2 == 0;
    std::normal_distribution<double> nd;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = ties ? static_cast<double>(uniform_int(rng, -3, 3)) : nd(rng);
      pos[i] = uniform_int(rng, 0, 1) == 1;
    }
    pos[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(n) - 1))] = true;
    const double ap = average_precision(s, pos);
    worst = std::max(worst, std::abs(ap - brute_ap(s, pos)));
    // Strictly monotone transforms keep the ranking.
    for (auto f : std::vector<std::function<double(double)>>{[](double x) { return 3.0 * x + 1.0; },
                                                             [](double x) { return x * x * x; },
                                                             [](double x) { return std::atan(x); }}) {
      std::vector<double> t(n);
      for (std::size_t i = 0; i < n; ++i) t[i] = f(s[i]);
      v.require(average_precision(t, pos) == ap, "monotone transform changed AP on instance " + std::to_string(trial));
    }
    // Perfect separator.
    std::vector<double> sep(n);
    for (std::size_t i = 0; i < n; ++i) sep[i] = pos[i] ? 1.0 + nd(rng) * 0.1 + 10.0 : nd(rng) * 0.1;
    v.require(average_precision(sep, pos) == 1.0, "perfect separator AP below 1");
  }
  v.require(worst <= 1e-12, "max deviation " + fmt(worst));

  // Probe output under right-singular-vector sign flips.
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 12;
    Matrix acts = gaussian(rng, 80, d);
    ConceptManifest m;
    for (int c = 0; c < 4; ++c) {
      Concept con{c, "c" + std::to_string(c), {}, {}};
      for (int j = 0; j < 10; ++j) {
        con.positive.push_back(c * 20 + j);
        con.negative.push_back(c * 20 + 10 + j);
        acts(c * 20 + j, c) += 1.5;
      }
      m.concepts.push_back(con);
    }
    const auto svd = svd_head(gaussian(rng, 8, d));
    auto flipped = svd;
    for (Index i = 0; i < flipped.rank(); ++i) {
      if (uniform_int(rng, 0, 1)) flipped.right_vectors.col(i) *= -1.0;
    }
    const ActivationMatrix pa(acts);
    const auto a = probe(svd, pa, m, 0.7);
    const auto b = probe(flipped, pa, m, 0.7);
    v.require(a.ap == b.ap && a.assigned == b.assigned, "probe changed under sign flips");
  }
  if (v.pass) v.detail = "200 instances, max deviation " + fmt(worst) + "; monotone, separator, sign-flip checks hold";
  return v;
}

Verdict concept_summaries() {
  std::mt19937_64 rng(107);
  Verdict v;
  const std::vector<double> sweep = default_threshold_sweep();
  for (int trial = 0; trial < 100; ++trial) {
    const Index r = uniform_int(rng, 1, 12);
    const int c = static_cast<int>(uniform_int(rng, 1, 15));
    ConceptProbeResult res;
    res.ap = Matrix(r, c);
    std::uniform_real_distribution<double> u(0.5, 1.0);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) res.ap(i, j) = u(rng);
    for (int j = 0; j < c; ++j) res.concept_ids.push_back(j);
    std::size_t prev_n = SIZE_MAX;
    double prev_p = 1e300;
    for (double t : sweep) {
      const auto s = summarize(rethreshold(res, t));
      v.require(s.n_unique <= prev_n && s.polysemanticity <= prev_p,
                "sweep not monotone on instance " + std::to_string(trial));
      prev_n = s.n_unique;
      prev_p = s.polysemanticity;
    }
  }
  for (int trial = 0; trial < 200; ++trial) {
    const int m = trial % 2 ? 3 : 2;
    std::vector<std::pair<std::string, ConceptSet>> sets;
    for (int j = 0; j < m; ++j) {
      ConceptSet s;
      const auto size = uniform_int(rng, 0, 40);
      for (int i = 0; i < size; ++i) s.insert(uniform_int(rng, 0, 60));
      sets.emplace_back("s" + std::to_string(j), s);
    }
    const auto part = venn(sets);
    // |union| = sum |A| - sum |A n B| (+ |A n B n C|).
    auto inter_size = [&](unsigned mask) {
      std::size_t count = 0;
      for (std::int64_t id = 0; id <= 60; ++id) {
        bool in_all = true;
        for (int j = 0; j < m; ++j) {
          if ((mask & (1u << j)) && !sets[static_cast<std::size_t>(j)].second.count(id)) in_all = false;
        }
        count += in_all ? 1 : 0;
      }
      return static_cast<long long>(count);
    };
    long long ie = 0;
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
      ie += (__builtin_popcount(mask) % 2 ? 1 : -1) * inter_size(mask);
    }
    v.require(static_cast<long long>(part.total()) == ie, "inclusion-exclusion fails on instance " + std::to_string(trial));
    for (int j = 0; j < m; ++j) {
      std::size_t in_j = 0;
      for (const auto& [mask, size] : part.region_sizes) in_j += (mask & (1u << j)) ? size : 0;
      v.require(in_j == sets[static_cast<std::size_t>(j)].second.size(), "regions do not sum to set size");
    }
  }
  if (v.pass) v.detail = "100 sweep instances monotone; 200 Venn instances exact";
  return v;
}

double gram_cka(const Matrix& a, const Matrix& b) {
  const Index n = a.rows();
  const Matrix h = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  const Matrix k = h * (a * a.transpose()) * h;
  const Matrix l = h * (b * b.transpose()) * h;
  return (k.array() * l.array()).sum() /
         std::sqrt((k.array() * k.array()).sum() * (l.array() * l.array()).sum());
}

Verdict cka_check() {
  std::mt19937_64 rng(108);
  Verdict v;
  double worst_self = 0, worst_sym = 0, worst_inv = 0, worst_gram = 0, slowest = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 500, da = uniform_int(rng, 8, 64), db = uniform_int(rng, 8, 64);
    const Matrix a = gaussian(rng, n, da);
    const Matrix b = a.leftCols(std::min(da, db)) * gaussian(rng, std::min(da, db), db) + gaussian(rng, n, db);
    const ActivationMatrix am(a), bm(b);
    CKAResult ab;
    slowest = std::max(slowest, seconds([&] { ab = cka(am, bm); }));
    worst_self = std::max(worst_self, std::abs(cka(am, am).value - 1.0));
    worst_sym = std::max(worst_sym, std::abs(ab.value - cka(bm, am).value));
    const Matrix q = testing::random_orthogonal(rng, da);
    worst_inv = std::max(worst_inv, std::abs(cka(ActivationMatrix(Matrix(a * q)), bm).value - ab.value));
    worst_inv = std::max(worst_inv, std::abs(cka(ActivationMatrix(Matrix(a * 42.0)), bm).value - ab.value));
    worst_gram = std::max(worst_gram, std::abs(gram_cka(a, b) - ab.value));
  }
  v.require(worst_self <= 1e-10, "cka(a,a) deviation " + fmt(worst_self));
  v.require(worst_sym <= 1e-12, "asymmetry " + fmt(worst_sym));
  v.require(worst_inv <= 1e-9, "invariance deviation " + fmt(worst_inv));
  v.require(worst_gram <= 1e-10, "feature vs Gram deviation " + fmt(worst_gram));
  v.require(slowest < 2.0, "runtime " + fmt(slowest) + " s");
  if (v.pass) {
    v.detail = "N=500; self " + fmt(worst_self) + ", sym " + fmt(worst_sym) + ", inv " + fmt(worst_inv) +
               ", gram " + fmt(worst_gram) + ", " + fmt(slowest) + " s";
  }
  return v;
}

CheckpointTensorMap random_map(std::mt19937_64& rng, const std::vector<std::pair<std::string, std::vector<std::int64_t>>>& layout,
                               const std::vector<DType>& dtypes) {
  std::normal_distribution<double> nd(0.0, 3.0);
  CheckpointTensorMap m;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    Tensor t{layout[i].second, {}, dtypes[i]};
    for (std::size_t e = 0; e < t.element_count(); ++e) t.values.push_back(nd(rng));
    m.emplace(layout[i].first, std::move(t));
  }
  return m;
}

Verdict interpolation_check() {
  std::mt19937_64 rng(109);
  Verdict v;
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<std::string, std::vector<std::int64_t>>> layout;
    std::vector<DType> dtypes;
    const auto count = uniform_int(rng, 1, 8);
    for (int i = 0; i < count; ++i) {
      std::vector<std::int64_t> shape;
      const auto rank = uniform_int(rng, 0, 3);
      for (int r = 0; r < rank; ++r) shape.push_back(uniform_int(rng, 1, 5));
      layout.emplace_back("layer" + std::to_string(uniform_int(rng, 0, 1000)) + "/t" + std::to_string(i), shape);
      dtypes.push_back(uniform_int(rng, 0, 1) ? DType::kFloat32 : DType::kFloat64);
    }
    const auto t0 = random_map(rng, layout, dtypes);
    const auto t1 = random_map(rng, layout, dtypes);
    const auto at0 = interpolate(t0, t1, 0.0);
    const auto at1 = interpolate(t0, t1, 1.0);
    for (const auto& [name, t] : t0) {
      v.require(at0.at(name).values == t.values, "alpha=0 differs from theta0");
      v.require(at1.at(name).values == t1.at(name).values, "alpha=1 differs from theta1");
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double alpha = u(rng);
    const auto mix = interpolate(t0, t1, alpha);
    v.require(mix.size() == t0.size(), "tensor count changed");
    for (const auto& [name, t] : t0) {
      const auto it = mix.find(name);
      v.require(it != mix.end(), "name '" + name + "' lost");
      if (it == mix.end()) continue;
      v.require(it->second.shape == t.shape && it->second.dtype == t.dtype, "shape or dtype of '" + name + "' changed");
      for (std::size_t e = 0; e < t.values.size(); ++e) {
        const double expected = t.values[e] + alpha * (t1.at(name).values[e] - t.values[e]);
        worst = std::max(worst, std::abs(it->second.values[e] - expected));
      }
    }
  }
  v.require(worst <= 1e-12, "linearity deviation " + fmt(worst));
  if (v.pass) v.detail = "50 fuzzed maps; endpoints exact, linearity " + fmt(worst);
  return v;
}

std::string run_report(const std::string& bundle, unsigned threads) {
  std::ostringstream out, err;
  const int code = cli::run({"repscope", "--threads", std::to_string(threads), "report", "--config", bundle}, out, err);
  if (code != 0) throw std::runtime_error(err.str());
  return out.str();
}

Verdict determinism() {
  Verdict v;
  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  for (const char* model : {"plain", "outlier"}) {
    const std::string bundle = (testing::fixtures() / model / "bundle.json").string();
    const auto first = run_report(bundle, 1);
    v.require(run_report(bundle, 1) == first, std::string(model) + ": two runs differ");
    v.require(run_report(bundle, 4) == first, std::string(model) + ": 1 vs 4 threads differ");
  }
  ::unsetenv("SOURCE_DATE_EPOCH");
  if (v.pass) v.detail = "both fixture bundles byte-identical across runs and 1/4 threads";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"gaussian_kurtosis", gaussian_kurtosis},
      {"outlier_sensitivity", outlier_sensitivity},
      {"svd_contract", svd_contract},
      {"importance_oracle", importance_oracle},
      {"pruning", pruning},
      {"effective_robustness", effective_robustness_check},
      {"average_precision", average_precision_check},
      {"concept_summaries", concept_summaries},
      {"cka", cka_check},
      {"interpolation", interpolation_check},
      {"determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << "\n";
    failures += v.pass ? 0 : 1;
  }
  std::cout << (failures ? "acceptance: " + std::to_string(failures) + " criteria failed" : "acceptance: all criteria passed")
            << std::endl;
  return failures ? 1 : 0;
}
