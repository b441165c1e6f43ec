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

// The `repscope` command line. run() is the whole program minus main(), so
// tests can drive it with in-memory streams.
//
// Exit codes: 0 success, 1 validation/degenerate/IO error (one line on the
// error stream), 2 usage error (message plus help).

#ifndef REPSCOPE_CLI_HPP_
#define REPSCOPE_CLI_HPP_

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "repscope/activation_stats.hpp"
#include "repscope/checkpoint_interp.hpp"
#include "repscope/cka.hpp"
#include "repscope/concept_probe.hpp"
#include "repscope/error.hpp"
#include "repscope/head_analysis.hpp"
#include "repscope/io.hpp"
#include "repscope/parallel.hpp"
#include "repscope/pipeline.hpp"
#include "repscope/report.hpp"
#include "repscope/zeroshot.hpp"

namespace repscope::cli {

namespace fs = std::filesystem;

/// Thrown for argument combinations CLI11 cannot express; maps to exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  // global
  std::string out;
  std::string format = "json";
  std::int64_t seed = 0;
  unsigned threads = 1;

  // shared inputs
  std::string acts, head, labels, baselines, manifest, config, sets;
  std::vector<std::string> shifts, a_layers, b_layers, merge;
  std::string basis, theta0, theta1;

  bool per_sample = false;
  std::optional<double> z;
  double outlier_z = kDefaultOutlierZ;
  double rank_tol = kDefaultRankTol;
  bool text_embeddings = false;
  std::optional<double> temperature;
  std::vector<double> fractions = default_prune_fractions();
  bool paper_fit = false;
  double acc_in = 0.0;
  std::vector<double> acc_shift;
  double threshold = kDefaultApThreshold;
  std::size_t top_k = 3;
  std::vector<double> sweep;
  std::string directions = "svd";
  std::optional<double> alpha;
};

namespace detail {

inline std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? sep : "") + parts[i];
  return s;
}

inline ClassifierHead load_head_option(const Options& o) {
  ClassifierHead head = io::load_head(o.head);
  if (o.text_embeddings) {
    const auto tau = o.temperature ? o.temperature : head.temperature();
    if (!tau) throw ValidationError("--text-embeddings needs --temperature or a sidecar temperature");
    head = build_head(head.weights(), *tau, head.class_names());
  }
  return head;
}

inline BaselineFit fit_option(const Options& o, ReportDocument& doc) {
  if (o.paper_fit) {
    const auto fit = BaselineFit::reference();
    add_fit(doc, fit, true);
    return fit;
  }
  const auto records = io::load_baselines(o.baselines);
  doc.inputs.push_back({"baselines", io::file_digest(o.baselines)});
  const auto fit = fit_baseline(records);
  add_fit(doc, fit, false);
  return fit;
}

inline std::vector<std::pair<std::string, ConceptSet>> read_named_sets(const nlohmann::json& j) {
  std::vector<std::pair<std::string, ConceptSet>> out;
  try {
    for (const auto& s : j.at("sets")) {
      const auto ids = s.at("concepts").get<std::vector<std::int64_t>>();
      out.emplace_back(s.at("name").get<std::string>(), ConceptSet(ids.begin(), ids.end()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad sets file: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands. Each returns the report to emit.

inline ReportDocument cmd_kurtosis(const Options& o) {
  ReportDocument doc;
  const auto acts = io::load_activations(o.acts);
  doc.inputs.push_back({"acts", io::file_digest(o.acts)});
  add_kurtosis(doc, kurtosis(acts, o.per_sample));
  if (o.z) add_outliers(doc, detect_outlier_features(acts, *o.z));
  return doc;
}

inline ReportDocument cmd_outliers(const Options& o) {
  ReportDocument doc;
  const auto acts = io::load_activations(o.acts);
  doc.inputs.push_back({"acts", io::file_digest(o.acts)});
  if (o.basis.empty()) {
    add_outliers(doc, detect_outlier_features(acts, o.outlier_z));
    doc.metadata["outliers.basis"] = "canonical";
  } else {
    const Matrix basis = io::read_matrix(o.basis);
    doc.inputs.push_back({"basis", io::file_digest(o.basis)});
    add_outliers(doc, projection_outliers(acts, basis, o.outlier_z));
    doc.metadata["outliers.basis"] = "projection onto supplied orthonormal columns";
  }
  return doc;
}

inline ReportDocument cmd_importance(const Options& o) {
  ReportDocument doc;
  const auto head = load_head_option(o);
  const auto acts = io::load_activations(o.acts);
  doc.inputs.push_back({"head", io::file_digest(o.head)});
  doc.inputs.push_back({"acts", io::file_digest(o.acts)});
  const auto svd = svd_head(head, o.rank_tol);
  add_importance(doc, svd, importance(svd, acts));
  return doc;
}

inline ReportDocument cmd_prune_sweep(const Options& o) {
  ReportDocument doc;
  const auto head = load_head_option(o);
  auto acts = io::load_activations(o.acts);
  doc.inputs.push_back({"head", io::file_digest(o.head)});
  doc.inputs.push_back({"acts", io::file_digest(o.acts)});
  if (!o.labels.empty()) {
    acts = io::with_labels(acts, io::load_labels(o.labels));
    doc.inputs.push_back({"labels", io::file_digest(o.labels)});
  }
  std::vector<ActivationMatrix> shifts;
  std::vector<std::string> names;
  for (std::size_t s = 0; s < o.shifts.size(); ++s) {
    shifts.push_back(io::load_activations(o.shifts[s]));
    names.push_back(shifts.back().source_id());
    doc.inputs.push_back({"shift." + std::to_string(s), io::file_digest(o.shifts[s])});
  }
  std::optional<BaselineFit> fit;
  if (o.paper_fit || !o.baselines.empty()) fit = fit_option(o, doc);
  add_prune_sweep(doc, prune_sweep(head, acts, o.fractions, shifts, fit), names);
  return doc;
}

inline ReportDocument cmd_er(const Options& o) {
  ReportDocument doc;
  const auto fit = fit_option(o, doc);
  const double shift = mean_shift_accuracy(o.acc_shift);
  add_robustness(doc, robustness_metrics(o.acc_in, shift, fit));
  if (o.acc_shift.size() > 1) doc.add("robustness.per_shift", o.acc_shift);
  return doc;
}

inline ReportDocument cmd_probe(const Options& o) {
  ReportDocument doc;
  const auto acts = io::load_activations(o.acts);
  const auto manifest = io::load_manifest(o.manifest);
  doc.inputs.push_back({"probe_acts", io::file_digest(o.acts)});
  doc.inputs.push_back({"manifest", io::file_digest(o.manifest)});
  ConceptProbeResult result;
  if (o.directions == "identity") {
    result = probe_directions(Matrix::Identity(acts.dim(), acts.dim()), acts, manifest, o.threshold);
    doc.metadata["concepts.directions"] = "canonical basis";
  } else {
    const auto head = load_head_option(o);
    doc.inputs.push_back({"head", io::file_digest(o.head)});
    result = probe(svd_head(head, o.rank_tol), acts, manifest, o.threshold);
    doc.metadata["concepts.directions"] = "right singular vectors of the head";
  }
  add_concepts(doc, result, o.top_k, o.sweep);
  return doc;
}

inline ReportDocument cmd_venn(const Options& o) {
  ReportDocument doc;
  const auto sets = read_named_sets(io::read_json(o.sets));
  doc.inputs.push_back({"sets", io::file_digest(o.sets)});
  const VennPartition part = venn(sets);
  Table t;
  t.columns = {"region", "size"};
  for (const auto& [mask, size] : part.region_sizes) {
    t.add_row({part.region_name(mask), static_cast<double>(size)});
  }
  doc.add("venn.regions", std::move(t));
  doc.add("venn.union_size", static_cast<double>(part.total()));
  return doc;
}

inline ReportDocument cmd_overlap_traj(const Options& o) {
  ReportDocument doc;
  const auto j = io::read_json(o.sets);
  doc.inputs.push_back({"sets", io::file_digest(o.sets)});
  ConceptSet zero, sup;
  std::vector<ConceptSet> fine;
  try {
    for (auto id : j.at("zero").get<std::vector<std::int64_t>>()) zero.insert(id);
    for (auto id : j.at("sup").get<std::vector<std::int64_t>>()) sup.insert(id);
    for (const auto& e : j.at("fine")) {
      const auto ids = e.get<std::vector<std::int64_t>>();
      fine.emplace_back(ids.begin(), ids.end());
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad trajectory file: ") + e.what());
  }
  Table t;
  t.columns = {"epoch", "fine_size", "fine_only", "fine&zero", "fine&sup", "fine&zero&sup", "status"};
  for (std::size_t e = 0; const auto& ep : overlap_trajectory(fine, zero, sup)) {
    std::vector<Cell> row{static_cast<double>(e++), static_cast<double>(ep.fine_size)};
    if (ep.fractions) {
      for (double f : *ep.fractions) row.emplace_back(f);
      row.emplace_back(std::string("ok"));
    } else {
      for (int k = 0; k < 4; ++k) row.emplace_back(std::string("undefined"));
      row.emplace_back(ep.error);
    }
    t.add_row(std::move(row));
  }
  doc.add("overlap_trajectory", std::move(t));
  return doc;
}

inline ReportDocument cmd_cka(const Options& o) {
  ReportDocument doc;
  std::vector<ActivationMatrix> a, b;
  for (std::size_t l = 0; l < o.a_layers.size(); ++l) {
    a.push_back(io::load_activations(o.a_layers[l]));
    doc.inputs.push_back({"a." + std::to_string(l), io::file_digest(o.a_layers[l])});
  }
  for (std::size_t l = 0; l < o.b_layers.size(); ++l) {
    b.push_back(io::load_activations(o.b_layers[l]));
    doc.inputs.push_back({"b." + std::to_string(l), io::file_digest(o.b_layers[l])});
  }
  Table t;
  t.columns = {"layer", "layer_a", "layer_b", "cka", "n"};
  const auto results = cka_sweep(a, b);
  for (std::size_t l = 0; l < results.size(); ++l) {
    t.add_row({static_cast<double>(l), a[l].layer_name(), b[l].layer_name(), results[l].value,
               static_cast<double>(results[l].n)});
  }
  doc.add("cka", std::move(t));
  doc.metadata["cka.kernel"] = kCkaKernel;
  return doc;
}

inline std::string alpha_dir_name(double alpha) {
  std::ostringstream s;
  s << "alpha_" << std::fixed << std::setprecision(2) << alpha;
  return s.str();
}

inline ReportDocument cmd_interp(const Options& o) {
  if (!o.merge.empty()) {
    std::vector<std::pair<double, ReportDocument>> per_alpha;
    for (const auto& item : o.merge) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError("--merge entries must look like <alpha>=<report.json>");
      double alpha = 0.0;
      try {
        alpha = std::stod(item.substr(0, eq));
      } catch (const std::exception&) {
        throw UsageError("bad alpha in --merge entry '" + item + "'");
      }
      per_alpha.emplace_back(alpha, load_report(item.substr(eq + 1)));
    }
    return sweep_report(per_alpha);
  }
  if (o.theta0.empty() || o.theta1.empty()) throw UsageError("interp needs --theta0 and --theta1 (or --merge)");
  if (o.out.empty()) throw UsageError("interp needs --out <dir>");
  ReportDocument doc;
  const auto t0 = io::load_checkpoint(o.theta0);
  const auto t1 = io::load_checkpoint(o.theta1);
  doc.inputs.push_back({"theta0", io::file_digest(o.theta0)});
  doc.inputs.push_back({"theta1", io::file_digest(o.theta1)});
  const std::vector<double> alphas = o.alpha ? std::vector<double>{*o.alpha} : default_alpha_grid();
  Table t;
  t.columns = {"alpha", "directory", "n_tensors"};
  for (double alpha : alphas) {
    const auto mixed = interpolate(t0, t1, alpha);
    const fs::path dir = o.alpha ? fs::path(o.out) : fs::path(o.out) / alpha_dir_name(alpha);
    io::save_checkpoint(dir, mixed);
    t.add_row({alpha, o.alpha ? std::string(".") : alpha_dir_name(alpha), static_cast<double>(mixed.size())});
  }
  doc.add("interp.outputs", std::move(t));
  return doc;
}

inline ReportDocument cmd_report(const Options& o) { return pipeline_full(fs::path(o.config)); }

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"repscope: representation-space diagnostics for classifier heads and activations",
               "repscope"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  Options o;

  app.add_option("--out", o.out, "Output path (report file, or checkpoint directory for interp)");
  app.add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", o.seed, "Seed forwarded to sampled procedures");
  app.add_option("--threads", o.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1u, 1024u));

  auto* kurt = app.add_subcommand("kurtosis", "Mean activation kurtosis");
  kurt->add_option("--acts", o.acts, "Activation matrix (.npy)")->required();
  kurt->add_flag("--per-sample", o.per_sample, "Include per-row kurtosis");
  kurt->add_option("--z", o.z, "Also flag outlier coordinates at this z-score");

  auto* outl = app.add_subcommand("outliers", "Outlier coordinates by per-row z-score");
  outl->add_option("--acts", o.acts, "Activation matrix (.npy)")->required();
  outl->add_option("--z", o.outlier_z, "z-score threshold");
  outl->add_option("--basis", o.basis, "Orthonormal d_H x m basis (.npy) to project onto");

  auto add_head_opts = [&](CLI::App* sub, bool required) {
    auto* h = sub->add_option("--head", o.head, "Classifier head W, K x d_H (.npy)");
    if (required) h->required();
    sub->add_flag("--text-embeddings", o.text_embeddings, "Head file holds raw text embeddings");
    sub->add_option("--temperature", o.temperature, "Temperature for --text-embeddings");
    sub->add_option("--rank-tol", o.rank_tol, "Relative singular value cutoff");
  };
  auto add_fit_opts = [&](CLI::App* sub) {
    sub->add_option("--baselines", o.baselines, "Baseline pool CSV (model_id,acc_in,acc_shift)");
    sub->add_flag("--paper-fit", o.paper_fit, "Use the fixed reference fit beta1=0.76, beta0=-1.49");
  };

  auto* imp = app.add_subcommand("importance", "Direction importance of the head's singular vectors");
  add_head_opts(imp, true);
  imp->add_option("--acts", o.acts, "Activation matrix (.npy)")->required();

  auto* prune = app.add_subcommand("prune-sweep", "Accuracy (and ER) while pruning singular values");
  add_head_opts(prune, true);
  prune->add_option("--acts", o.acts, "Labeled activation matrix (.npy)")->required();
  prune->add_option("--labels", o.labels, "Labels JSON (overrides the sidecar)");
  prune->add_option("--fractions", o.fractions, "Pruned fractions")->delimiter(',');
  prune->add_option("--shift", o.shifts, "Labeled shifted-set activations")->delimiter(',');
  add_fit_opts(prune);

  auto* er = app.add_subcommand("er", "Effective Robustness and %acc");
  add_fit_opts(er);
  er->add_option("--acc-in", o.acc_in, "In-distribution accuracy")->required();
  er->add_option("--acc-shift", o.acc_shift, "Shifted accuracy, or one per shift (averaged)")
      ->required()
      ->delimiter(',');

  auto* prb = app.add_subcommand("probe", "Concept probing of head directions by average precision");
  add_head_opts(prb, false);
  prb->add_option("--svd-head", o.head, "Head whose right singular vectors are probed");
  prb->add_option("--probe-acts", o.acts, "Probe activation matrix (.npy)")->required();
  prb->add_option("--manifest", o.manifest, "Concept manifest JSON")->required();
  prb->add_option("--threshold", o.threshold, "AP threshold");
  prb->add_option("--top-k", o.top_k, "Concepts listed per direction")->check(CLI::PositiveNumber);
  prb->add_option("--sweep", o.sweep, "Thresholds for the n_unique sweep")->delimiter(',');
  prb->add_option("--directions", o.directions, "svd or identity")
      ->check(CLI::IsMember({"svd", "identity"}));

  auto* vn = app.add_subcommand("venn", "Venn region sizes of 2 or 3 concept sets");
  vn->add_option("--sets", o.sets, "JSON {\"sets\": [{\"name\", \"concepts\"}]}")->required();

  auto* traj = app.add_subcommand("overlap-traj", "Per-epoch overlap of finetuned concept sets");
  traj->add_option("--sets", o.sets, "JSON {\"zero\", \"sup\", \"fine\": [[...], ...]}")->required();

  auto* ck = app.add_subcommand("cka", "Linear CKA per aligned layer pair");
  ck->add_option("--a", o.a_layers, "Model A layer activations")->required()->delimiter(',');
  ck->add_option("--b", o.b_layers, "Model B layer activations")->required()->delimiter(',');

  auto* ip = app.add_subcommand("interp", "Weight-space interpolation of two checkpoints");
  ip->add_option("--theta0", o.theta0, "Checkpoint directory at alpha = 0");
  ip->add_option("--theta1", o.theta1, "Checkpoint directory at alpha = 1");
  ip->add_option("--alpha", o.alpha, "Single alpha; default sweeps 0.0..1.0 step 0.1")
      ->check(CLI::Range(0.0, 1.0));
  ip->add_option("--merge", o.merge, "Merge per-alpha reports: <alpha>=<report.json>,...")
      ->delimiter(',');

  auto* rep = app.add_subcommand("report", "Full per-model pipeline from a bundle manifest");
  rep->add_option("--config", o.config, "Bundle manifest JSON")->required();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "repscope: " << e.what() << "\n" << app.help();
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  set_num_threads(o.threads);

  // Effective configuration, without options that do not change results.
  std::map<std::string, std::string> config;
  auto record = [&](const CLI::App* scope) {
    for (const CLI::Option* opt : scope->get_options()) {
      const std::string key = opt->get_name(false, true);
      if (key.empty() || key == "--help" || key == "-h" || key == "--out" || key == "--threads") continue;
      std::string value = opt->count() ? detail::join(opt->results(), ",") : opt->get_default_str();
      config[key.substr(key.find_first_not_of('-'))] = value;
    }
  };
  record(&app);
  record(sub);

  const std::map<std::string, std::function<ReportDocument(const Options&)>> handlers{
      {"kurtosis", detail::cmd_kurtosis},   {"outliers", detail::cmd_outliers},
      {"importance", detail::cmd_importance}, {"prune-sweep", detail::cmd_prune_sweep},
      {"er", detail::cmd_er},               {"probe", detail::cmd_probe},
      {"venn", detail::cmd_venn},           {"overlap-traj", detail::cmd_overlap_traj},
      {"cka", detail::cmd_cka},             {"interp", detail::cmd_interp},
      {"report", detail::cmd_report}};

  try {
    if ((name == "er") && !o.paper_fit && o.baselines.empty()) {
      throw UsageError("er needs --baselines <csv> or --paper-fit");
    }
    if (name == "probe" && o.directions == "svd" && o.head.empty()) {
      throw UsageError("probe needs --svd-head <npy> (or --directions identity)");
    }
    ReportDocument doc = handlers.at(name)(o);
    for (const auto& [k, v] : config) doc.config[k] = v;
    std::string command = "repscope " + name;
    for (const auto& [k, v] : config) command += " --" + k + "=" + v;
    doc.provenance = {command, provenance_timestamp()};

    const std::string text = o.format == "csv" ? to_csv(doc) : to_canonical_json(doc);
    if (o.out.empty() || (name == "interp" && o.merge.empty())) {
      out << text;
    } else {
      io::write_text(o.out, text);
    }
    if (name == "kurtosis" && doc.scalar("kurtosis.advisory_outliers") > 0.0) {
      err << "repscope: note: mean kurtosis " << doc.scalar("kurtosis.mean") << " >= "
          << kKurtosisAdvisoryThreshold << ", outlier features likely\n";
    }
    return 0;
  } catch (const UsageError& e) {
    err << "repscope: " << e.what() << "\n" << sub->help();
    return 2;
  } catch (const Error& e) {
    err << "repscope: error: " << detail::one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "repscope: error: " << detail::one_line(e.what()) << "\n";
    return 1;
  }
}

}  // namespace repscope::cli

#endif  // REPSCOPE_CLI_HPP_
