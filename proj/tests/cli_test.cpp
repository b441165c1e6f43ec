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

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "repscope/cli.hpp"
#include "test_support.hpp"

namespace repscope {
namespace {

namespace fs = std::filesystem;
using testing::fixtures;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "repscope");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fx(const std::string& rel) { return (fixtures() / rel).string(); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override { ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1); }
  void TearDown() override { ::unsetenv("SOURCE_DATE_EPOCH"); }
};

TEST_F(Cli, HelpIsExitZero) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("prune-sweep"), std::string::npos);
}

TEST_F(Cli, UnknownSubcommandIsUsageError) {
  const auto r = run_cli({"bogus"});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(Cli, MissingRequiredOptionIsUsageError) {
  EXPECT_EQ(run_cli({"kurtosis"}).code, 2);
  EXPECT_EQ(run_cli({"er", "--acc-in", "0.6", "--acc-shift", "0.4"}).code, 2);
  EXPECT_EQ(run_cli({"--format", "xml", "er", "--paper-fit", "--acc-in", "0.6", "--acc-shift", "0.4"}).code, 2);
}

TEST_F(Cli, ErBoundaryIsValidationError) {
  const auto r = run_cli({"er", "--paper-fit", "--acc-in", "1.0", "--acc-shift", "0.5"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("repscope: error: ", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_NE(r.err.find("infinite"), std::string::npos);
}

TEST_F(Cli, ErPaperFit) {
  const auto r = run_cli({"er", "--paper-fit", "--acc-in", "0.6", "--acc-shift", "0.5,0.38"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = from_json(nlohmann::json::parse(r.out));
  EXPECT_NEAR(doc.scalar("robustness.er"), 0.2052796501413293147, 1e-12);
  EXPECT_NEAR(doc.scalar("robustness.acc_shift"), 0.44, 1e-15);
  EXPECT_EQ(doc.provenance.timestamp, "2023-11-14T22:13:20Z");
  EXPECT_EQ(doc.provenance.command.rfind("repscope er ", 0), 0u);
}

TEST_F(Cli, ErFromBaselinesCsv) {
  const auto r = run_cli({"er", "--baselines", fx("baselines.csv"), "--acc-in", "0.7", "--acc-shift", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = from_json(nlohmann::json::parse(r.out));
  EXPECT_EQ(doc.scalar("baseline.n_points"), 12.0);
  EXPECT_EQ(doc.inputs.front().role, "baselines");
}

TEST_F(Cli, KurtosisAdvisoryNote) {
  const auto outlier = run_cli({"kurtosis", "--acts", fx("outlier/acts.npy")});
  ASSERT_EQ(outlier.code, 0) << outlier.err;
  EXPECT_NE(outlier.err.find("outlier features likely"), std::string::npos);
  const auto plain = run_cli({"kurtosis", "--acts", fx("plain/acts.npy"), "--per-sample"});
  ASSERT_EQ(plain.code, 0) << plain.err;
  EXPECT_TRUE(plain.err.empty());
  const auto doc = from_json(nlohmann::json::parse(plain.out));
  EXPECT_LT(doc.scalar("kurtosis.mean"), 5.0);
  EXPECT_EQ(std::get<std::vector<double>>(doc.metrics.at("kurtosis.per_sample")).size(), 200u);
}

TEST_F(Cli, MissingInputIsIoError) {
  const auto r = run_cli({"kurtosis", "--acts", "/nonexistent.npy"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("cannot open"), std::string::npos);
}

TEST_F(Cli, CsvToFile) {
  const auto dir = testing::scratch_dir("cli_csv");
  const auto path = (dir / "out.csv").string();
  const auto r = run_cli({"--format", "csv", "--out", path, "outliers", "--acts", fx("outlier/acts.npy")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  const auto text = npy::read_file_bytes(path);
  EXPECT_NE(text.find("outliers.n_coordinates_flagged,1\n"), std::string::npos) << text;
}

TEST_F(Cli, ImportanceAndPruneSweep) {
  const auto imp = run_cli({"importance", "--head", fx("plain/head.npy"), "--text-embeddings", "--acts",
                            fx("plain/acts.npy")});
  ASSERT_EQ(imp.code, 0) << imp.err;
  const auto prune = run_cli({"prune-sweep", "--head", fx("plain/head.npy"), "--text-embeddings", "--acts",
                              fx("plain/acts.npy"), "--shift", fx("plain/shift0.npy") + "," + fx("plain/shift1.npy"),
                              "--fractions", "0,0.5", "--paper-fit"});
  ASSERT_EQ(prune.code, 0) << prune.err;
  const auto doc = from_json(nlohmann::json::parse(prune.out));
  const auto& t = doc.table("prune_sweep");
  EXPECT_EQ(t.rows.size(), 2u);
  EXPECT_GE(t.column("acc_shift.shift1"), 0);
}

TEST_F(Cli, TextEmbeddingsWithoutTemperature) {
  // acts.npy carries no temperature in its sidecar.
  const auto r = run_cli({"importance", "--head", fx("plain/acts.npy"), "--text-embeddings", "--acts",
                          fx("plain/acts.npy")});
  EXPECT_EQ(r.code, 1);
}

TEST_F(Cli, ProbeModes) {
  const auto svd = run_cli({"probe", "--svd-head", fx("plain/head.npy"), "--probe-acts", fx("plain/probe.npy"),
                            "--manifest", fx("plain/concepts.json"), "--sweep", "0.8,0.9"});
  ASSERT_EQ(svd.code, 0) << svd.err;
  const auto ident = run_cli({"probe", "--directions", "identity", "--probe-acts", fx("plain/probe.npy"),
                              "--manifest", fx("plain/concepts.json")});
  ASSERT_EQ(ident.code, 0) << ident.err;
  EXPECT_EQ(run_cli({"probe", "--probe-acts", fx("plain/probe.npy"), "--manifest", fx("plain/concepts.json")}).code,
            2);
}

TEST_F(Cli, VennAndOverlap) {
  const auto dir = testing::scratch_dir("cli_sets");
  io::write_text(dir / "venn.json",
                 R"({"sets": [{"name": "zero", "concepts": [1, 2, 3]}, {"name": "sup", "concepts": [3, 4]}]})");
  io::write_text(dir / "traj.json", R"({"zero": [1, 2], "sup": [2, 3], "fine": [[1, 2, 3, 4], []]})");
  const auto v = run_cli({"venn", "--sets", (dir / "venn.json").string()});
  ASSERT_EQ(v.code, 0) << v.err;
  EXPECT_EQ(from_json(nlohmann::json::parse(v.out)).scalar("venn.union_size"), 4.0);
  const auto t = run_cli({"overlap-traj", "--sets", (dir / "traj.json").string()});
  ASSERT_EQ(t.code, 0) << t.err;
  const auto traj = from_json(nlohmann::json::parse(t.out));
  const auto& table = traj.table("overlap_trajectory");
  EXPECT_EQ(std::get<std::string>(table.rows[1][2]), "undefined");
  io::write_text(dir / "bad.json", R"({"sets": [{"name": "x"}]})");
  EXPECT_EQ(run_cli({"venn", "--sets", (dir / "bad.json").string()}).code, 1);
}

TEST_F(Cli, CkaLayers) {
  const auto r = run_cli({"cka", "--a", fx("plain/acts.npy") + "," + fx("plain/shift0.npy"), "--b",
                          fx("outlier/acts.npy") + "," + fx("plain/shift0.npy")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = from_json(nlohmann::json::parse(r.out));
  const auto& t = doc.table("cka");
  EXPECT_NEAR(std::get<double>(t.rows[1][3]), 1.0, 1e-12);
  EXPECT_NEAR(std::get<double>(t.rows[0][3]), 1.0, 1e-12);  // constant column shift
  EXPECT_EQ(run_cli({"cka", "--a", fx("plain/acts.npy"), "--b", fx("plain/probe.npy")}).code, 1);
}

TEST_F(Cli, InterpSweepAndMerge) {
  const auto dir = testing::scratch_dir("cli_interp");
  CheckpointTensorMap t0, t1;
  t0["w"] = Tensor{{2}, {0.0, 1.0}, DType::kFloat64};
  t1["w"] = Tensor{{2}, {1.0, 3.0}, DType::kFloat64};
  io::save_checkpoint(dir / "t0", t0);
  io::save_checkpoint(dir / "t1", t1);
  const auto r = run_cli({"--out", (dir / "mix").string(), "interp", "--theta0", (dir / "t0").string(), "--theta1",
                          (dir / "t1").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto mid = io::load_checkpoint(dir / "mix" / "alpha_0.50");
  EXPECT_EQ(mid.at("w").values, (std::vector<double>{0.5, 2.0}));
  EXPECT_TRUE(fs::exists(dir / "mix" / "alpha_1.00" / "index.json"));

  ReportDocument a, b;
  a.add("m", 1.0);
  b.add("m", 2.0);
  save_report(a, dir / "a.json");
  save_report(b, dir / "b.json");
  const auto merged = run_cli({"interp", "--merge", "0=" + (dir / "a.json").string() + ",1=" + (dir / "b.json").string()});
  ASSERT_EQ(merged.code, 0) << merged.err;
  EXPECT_EQ(from_json(nlohmann::json::parse(merged.out)).table("alpha_sweep").rows.size(), 2u);
  EXPECT_EQ(run_cli({"interp", "--merge", "nonsense"}).code, 2);
  EXPECT_EQ(run_cli({"interp", "--theta0", (dir / "t0").string()}).code, 2);
}

TEST_F(Cli, OutputIndependentOfThreadsAndOutFlag) {
  const auto a = run_cli({"--threads", "1", "report", "--config", fx("plain/bundle.json")});
  const auto b = run_cli({"--threads", "3", "report", "--config", fx("plain/bundle.json")});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

}  // namespace
}  // namespace repscope
