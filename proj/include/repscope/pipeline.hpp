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

// Conversion of analysis results into report metrics, and the end-to-end
// per-model pipeline driven by a JSON bundle manifest.

#ifndef REPSCOPE_PIPELINE_HPP_
#define REPSCOPE_PIPELINE_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "repscope/activation_stats.hpp"
#include "repscope/concept_probe.hpp"
#include "repscope/error.hpp"
#include "repscope/head_analysis.hpp"
#include "repscope/io.hpp"
#include "repscope/report.hpp"
#include "repscope/zeroshot.hpp"

namespace repscope {

inline std::vector<double> default_prune_fractions() {
  std::vector<double> f;
  for (int i = 0; i <= 9; ++i) f.push_back(i / 10.0);
  return f;
}

inline std::vector<double> default_threshold_sweep() { return {0.8, 0.85, 0.9, 0.95}; }

// ---------------------------------------------------------------------------
// Result -> report metrics.

inline void add_kurtosis(ReportDocument& doc, const KurtosisResult& k) {
  doc.add("kurtosis.mean", k.mean_kurtosis);
  doc.add("kurtosis.n_samples", static_cast<double>(k.n_samples));
  doc.add("kurtosis.dim", static_cast<double>(k.dim));
  doc.add("kurtosis.advisory_outliers", k.mean_kurtosis >= kKurtosisAdvisoryThreshold ? 1.0 : 0.0);
  if (k.per_sample) doc.add("kurtosis.per_sample", *k.per_sample);
  doc.metadata["kurtosis.convention"] = "population moments per row, averaged over all rows";
}

inline void add_outliers(ReportDocument& doc, const OutlierFeatureReport& r,
                         const std::string& prefix = "outliers") {
  doc.add(prefix + ".threshold_z", r.threshold_z);
  doc.add(prefix + ".frequency", r.frequency);
  double flagged_coords = 0.0, flagged_samples = 0.0;
  for (double f : r.frequency) flagged_coords += f > 0.0 ? 1.0 : 0.0;
  for (const auto& s : r.outlier_coords) flagged_samples += s.empty() ? 0.0 : 1.0;
  doc.add(prefix + ".n_coordinates_flagged", flagged_coords);
  doc.add(prefix + ".fraction_samples_flagged",
          flagged_samples / static_cast<double>(r.outlier_coords.size()));
}

inline void add_importance(ReportDocument& doc, const SVDecomposition& svd, const ImportanceProfile& p) {
  const std::vector<double> sigma(svd.singular_values.data(),
                                  svd.singular_values.data() + svd.singular_values.size());
  doc.add("importance.singular_values", sigma);
  doc.add("importance.scores", p.importance);
  doc.add("importance.head_share", p.head_share);
  doc.add("importance.encoder_share", p.encoder_share);
  doc.add("importance.ratio", p.ratio);
  doc.add("importance.argmax", static_cast<double>(p.argmax_index));
  doc.add("importance.rank", static_cast<double>(svd.rank()));
  if (sigma.size() >= 2) {
    try {
      doc.add("importance.spearman_sigma", spearman(sigma, p.importance));
    } catch (const DegenerateError&) {
      doc.metadata["importance.spearman_sigma"] = "undefined (constant singular values or scores)";
    }
  }
  doc.metadata["importance.ratio_definition"] = kImportanceRatioDefinition;
  doc.metadata["svd.sign_rule"] = "largest-magnitude entry of each right singular vector is nonnegative";
}

inline void add_prune_sweep(ReportDocument& doc, const PruneSweepResult& r,
                            const std::vector<std::string>& shift_names = {}) {
  Table t;
  t.columns = {"fraction", "removed", "acc_in"};
  for (std::size_t s = 0; s < (r.acc_shift.empty() ? 0 : r.acc_shift.front().size()); ++s) {
    t.columns.push_back("acc_shift." + (s < shift_names.size() ? shift_names[s] : std::to_string(s)));
  }
  const bool has_shift = !r.mean_acc_shift.empty();
  if (has_shift) {
    t.columns.push_back("acc_shift_mean");
    t.columns.push_back("er");
  }
  for (std::size_t f = 0; f < r.fractions.size(); ++f) {
    std::vector<Cell> row{r.fractions[f], static_cast<double>(r.removed[f]), r.acc_in[f]};
    for (double a : r.acc_shift[f]) row.emplace_back(a);
    if (has_shift) {
      row.emplace_back(r.mean_acc_shift[f]);
      if (r.er[f]) {
        row.emplace_back(*r.er[f]);
      } else {
        row.emplace_back(std::string("undefined"));
      }
    }
    t.add_row(std::move(row));
  }
  doc.add("prune_sweep", std::move(t));
  doc.add("prune_sweep.rank", static_cast<double>(r.rank));
}

inline void add_fit(ReportDocument& doc, const BaselineFit& fit, bool reference) {
  doc.add("baseline.beta0", fit.beta0);
  doc.add("baseline.beta1", fit.beta1);
  doc.add("baseline.pearson_r", fit.pearson_r);
  doc.add("baseline.n_points", static_cast<double>(fit.n_points));
  doc.metadata["baseline.source"] = reference ? "reference fit (beta1=0.76, beta0=-1.49)" : "OLS on baseline CSV";
}

inline void add_robustness(ReportDocument& doc, const RobustnessMetrics& m) {
  doc.add("robustness.er", m.er);
  doc.add("robustness.pct_acc", m.pct_acc);
  doc.add("robustness.acc_in", m.acc_in);
  doc.add("robustness.acc_shift", m.acc_shift);
}

inline void add_concepts(ReportDocument& doc, const ConceptProbeResult& result, std::size_t top_k,
                         const std::vector<double>& sweep) {
  const ConceptSummary s = summarize(result, top_k);
  doc.add("concepts.threshold", result.threshold);
  doc.add("concepts.n_unique", static_cast<double>(s.n_unique));
  doc.add("concepts.polysemanticity", s.polysemanticity);
  doc.add("concepts.n_directions", static_cast<double>(result.ap.rows()));
  doc.add("concepts.n_concepts", static_cast<double>(result.ap.cols()));

  std::map<std::int64_t, std::string> names;
  for (std::size_t c = 0; c < result.concept_ids.size(); ++c) {
    names[result.concept_ids[c]] = result.concept_names[c];
  }
  Table top;
  top.columns = {"direction", "rank", "concept_id", "concept_name", "ap"};
  for (std::size_t i = 0; i < s.top_k.size(); ++i) {
    for (std::size_t k = 0; k < s.top_k[i].size(); ++k) {
      const auto& [id, ap] = s.top_k[i][k];
      top.add_row({static_cast<double>(i), static_cast<double>(k + 1), static_cast<double>(id), names[id], ap});
    }
  }
  doc.add("concepts.top_k", std::move(top));

  Table assigned;
  assigned.columns = {"direction", "concept_id", "concept_name", "ap"};
  for (Index i = 0; i < result.ap.rows(); ++i) {
    for (Index c = 0; c < result.ap.cols(); ++c) {
      if (result.ap(i, c) >= result.threshold) {
        const auto id = result.concept_ids[static_cast<std::size_t>(c)];
        assigned.add_row({static_cast<double>(i), static_cast<double>(id), names[id], result.ap(i, c)});
      }
    }
  }
  doc.add("concepts.assigned", std::move(assigned));

  if (!sweep.empty()) {
    Table t;
    t.columns = {"threshold", "n_unique", "polysemanticity"};
    for (double th : sweep) {
      const ConceptSummary ss = summarize(rethreshold(result, th), top_k);
      t.add_row({th, static_cast<double>(ss.n_unique), ss.polysemanticity});
    }
    doc.add("concepts.threshold_sweep", std::move(t));
  }
  doc.metadata["concepts.ap_sign_rule"] = "max(AP(v^T h), AP(-v^T h))";
  doc.metadata["concepts.ap_ties"] = "equal scores ranked by ascending index (positives before negatives)";
}

// ---------------------------------------------------------------------------
// End-to-end pipeline.

struct PipelineConfig {
  std::filesystem::path head;
  bool head_is_text = false;
  std::optional<double> temperature;
  std::filesystem::path acts;
  std::vector<std::filesystem::path> shift_acts;
  std::filesystem::path probe_acts;
  std::filesystem::path probe_manifest;
  std::filesystem::path baselines;
  bool reference_fit = false;
  std::vector<double> fractions = default_prune_fractions();
  std::vector<double> threshold_sweep = default_threshold_sweep();
  double threshold = kDefaultApThreshold;
  double z = kDefaultOutlierZ;
  std::size_t top_k = 3;
  double rank_tol = kDefaultRankTol;
};

inline PipelineConfig parse_pipeline_config(const nlohmann::json& j, const std::filesystem::path& base) {
  PipelineConfig c;
  auto path = [&](const std::string& key) -> std::filesystem::path {
    const std::filesystem::path p = j.at(key).get<std::string>();
    return p.is_absolute() ? p : base / p;
  };
  try {
    c.head = path("head");
    c.acts = path("acts");
    c.head_is_text = j.value("head_is_text", false);
    if (j.contains("temperature")) c.temperature = j.at("temperature").get<double>();
    if (j.contains("shift_acts")) {
      for (const auto& s : j.at("shift_acts")) {
        const std::filesystem::path p = s.get<std::string>();
        c.shift_acts.push_back(p.is_absolute() ? p : base / p);
      }
    }
    if (j.contains("probe_acts")) c.probe_acts = path("probe_acts");
    if (j.contains("probe_manifest")) c.probe_manifest = path("probe_manifest");
    if (j.contains("baselines")) c.baselines = path("baselines");
    c.reference_fit = j.value("paper_fit", false);
    if (j.contains("fractions")) c.fractions = j.at("fractions").get<std::vector<double>>();
    if (j.contains("threshold_sweep")) c.threshold_sweep = j.at("threshold_sweep").get<std::vector<double>>();
    c.threshold = j.value("threshold", kDefaultApThreshold);
    c.z = j.value("z", kDefaultOutlierZ);
    c.top_k = j.value("top_k", std::size_t{3});
    c.rank_tol = j.value("rank_tol", kDefaultRankTol);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad pipeline manifest: ") + e.what());
  }
  if (c.shift_acts.empty()) throw ValidationError("pipeline manifest needs at least one shift_acts entry");
  if (c.probe_acts.empty() || c.probe_manifest.empty()) {
    throw ValidationError("pipeline manifest needs probe_acts and probe_manifest");
  }
  if (c.baselines.empty() && !c.reference_fit) {
    throw ValidationError("pipeline manifest needs baselines or paper_fit: true");
  }
  return c;
}

inline std::map<std::string, std::string> describe(const PipelineConfig& c) {
  auto join = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + detail::format_real(v[i]);
    return s;
  };
  return {{"fractions", join(c.fractions)},
          {"threshold", detail::format_real(c.threshold)},
          {"threshold_sweep", join(c.threshold_sweep)},
          {"z", detail::format_real(c.z)},
          {"top_k", std::to_string(c.top_k)},
          {"rank_tol", detail::format_real(c.rank_tol)},
          {"paper_fit", c.reference_fit ? "true" : "false"},
          {"head_is_text", c.head_is_text ? "true" : "false"}};
}

/// Runs a stage, prefixing any error with the stage name.
template <typename Fn>
void run_stage(const std::string& stage, Fn&& fn) {
  try {
    fn();
  } catch (const DegenerateError& e) {
    throw DegenerateError("stage '" + stage + "': " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError("stage '" + stage + "': " + e.what());
  } catch (const ShapeError& e) {
    throw ShapeError("stage '" + stage + "': " + e.what());
  } catch (const FormatError& e) {
    throw FormatError("stage '" + stage + "': " + e.what());
  } catch (const ConsistencyError& e) {
    throw ConsistencyError("stage '" + stage + "': " + e.what());
  } catch (const IoError& e) {
    throw IoError("stage '" + stage + "': " + e.what());
  }
}

/// Kurtosis, outlier features, importance, prune sweep, robustness and
/// concept summary of one model, in that order.
inline ReportDocument pipeline_full(const PipelineConfig& c) {
  ReportDocument doc;
  ClassifierHead head;
  ActivationMatrix acts, probe_acts;
  std::vector<ActivationMatrix> shifts;
  ConceptManifest manifest;
  std::vector<AccuracyRecord> baselines;

  run_stage("load", [&] {
    head = io::load_head(c.head);
    if (c.head_is_text) {
      const auto tau = c.temperature ? c.temperature : head.temperature();
      if (!tau) throw ValidationError("text-embedding head needs a temperature");
      head = build_head(head.weights(), *tau, head.class_names());
    }
    acts = io::load_activations(c.acts);
    for (const auto& p : c.shift_acts) shifts.push_back(io::load_activations(p));
    probe_acts = io::load_activations(c.probe_acts);
    manifest = io::load_manifest(c.probe_manifest);
    if (!c.baselines.empty()) baselines = io::load_baselines(c.baselines);
    doc.inputs.push_back({"head", io::file_digest(c.head)});
    doc.inputs.push_back({"acts", io::file_digest(c.acts)});
    for (std::size_t s = 0; s < c.shift_acts.size(); ++s) {
      doc.inputs.push_back({"shift_acts." + std::to_string(s), io::file_digest(c.shift_acts[s])});
    }
    doc.inputs.push_back({"probe_acts", io::file_digest(c.probe_acts)});
    doc.inputs.push_back({"probe_manifest", io::file_digest(c.probe_manifest)});
    if (!c.baselines.empty()) doc.inputs.push_back({"baselines", io::file_digest(c.baselines)});
  });

  run_stage("kurtosis", [&] { add_kurtosis(doc, kurtosis(acts)); });
  run_stage("outliers", [&] { add_outliers(doc, detect_outlier_features(acts, c.z)); });

  SVDecomposition svd;
  run_stage("importance", [&] {
    svd = svd_head(head, c.rank_tol);
    add_importance(doc, svd, importance(svd, acts));
  });

  BaselineFit fit;
  run_stage("baseline", [&] {
    fit = c.reference_fit ? BaselineFit::reference() : fit_baseline(baselines);
    add_fit(doc, fit, c.reference_fit);
  });

  run_stage("prune_sweep", [&] {
    std::vector<std::string> names;
    for (const auto& s : shifts) names.push_back(s.source_id());
    add_prune_sweep(doc, prune_sweep(head, acts, c.fractions, shifts, fit), names);
  });

  run_stage("robustness", [&] {
    const double acc_in = head_accuracy(head.weights(), acts);
    std::vector<double> per_shift;
    for (const auto& s : shifts) per_shift.push_back(head_accuracy(head.weights(), s));
    add_robustness(doc, robustness_metrics(acc_in, mean_shift_accuracy(per_shift), fit));
  });

  run_stage("concepts", [&] {
    add_concepts(doc, probe(svd, probe_acts, manifest, c.threshold), c.top_k, c.threshold_sweep);
  });
  return doc;
}

inline ReportDocument pipeline_full(const std::filesystem::path& manifest_path) {
  const auto j = io::read_json(manifest_path);
  const PipelineConfig c = parse_pipeline_config(j, manifest_path.parent_path());
  ReportDocument doc = pipeline_full(c);
  doc.inputs.insert(doc.inputs.begin(), {"bundle_manifest", io::file_digest(manifest_path)});
  for (const auto& [k, v] : describe(c)) doc.config[k] = v;
  return doc;
}

}  // namespace repscope

#endif  // REPSCOPE_PIPELINE_HPP_
