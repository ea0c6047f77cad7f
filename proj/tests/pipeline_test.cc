// Copyright 2026 The nisleep Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"
#include "nisleep/binary_io.h"
#include "nisleep/config.h"
#include "nisleep/error.h"
#include "nisleep/pipeline.h"
#include "nisleep/synthetic.h"

namespace nisleep {
namespace {

namespace fs = std::filesystem;

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("nisleep_pipeline_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string ReadAll(const fs::path& path) {
  const auto bytes = ReadFileBytes(path);
  return std::string(bytes.begin(), bytes.end());
}

int RunCli(const std::string& args) {
  const std::string cmd = std::string(NISLEEP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(ConfigTest, ParsesSectionsCommentsAndQuotes) {
  RunConfig c;
  ApplyConfigText(c,
                  "# run settings\n"
                  "seed = 7\n"
                  "catalog = \"FeatLong\"  # exhaustive\n"
                  "lambda = 0.5\n"
                  "\n"
                  "[logistic]\n"
                  "l2 = 0.01\n"
                  "[gbt]\n"
                  "n_rounds = 12\n");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.catalog, "FeatLong");
  EXPECT_EQ(c.lambda, 0.5);
  EXPECT_EQ(c.logistic_l2, 0.01);
  EXPECT_EQ(c.gbt_n_rounds, 12);
  EXPECT_EQ(c.EffectiveVariant(), "NormIntSleep-FeatLong-logistic");
}

TEST(ConfigTest, LaterValuesOverrideEarlierOnes) {
  RunConfig c;
  ApplyConfigText(c, "select_fraction = 0.5\n");
  ApplyConfigValue(c, "select_fraction", "0.1");
  EXPECT_EQ(c.select_fraction, 0.1);
  RunConfig round_trip;
  ApplyConfigText(round_trip, ConfigToText(c));
  EXPECT_EQ(ConfigEntries(round_trip), ConfigEntries(c));
}

TEST(ConfigTest, ErrorsAreUsageErrorsWithLineNumbers) {
  RunConfig c;
  try {
    ApplyConfigText(c, "seed = 1\nunknown_key = 3\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUsage);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ApplyConfigValue(c, "lambda", "abc"), Error);
  EXPECT_THROW(ApplyConfigValue(c, "seed", "-1"), Error);
}

class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(FreshDir("suite"));
    SyntheticCorpusOptions opt;
    opt.n_subjects = 6;
    opt.epochs_per_subject = 20;
    opt.seed = 3;
    WriteSyntheticCorpus(opt, *root_ / "edf", *root_ / "labels");
    IngestOptions ingest;
    ingest.edf_dir = *root_ / "edf";
    ingest.label_dir = *root_ / "labels";
    ingest.out_store = *root_ / "store";
    const IngestResult r = CmdIngest(ingest);
    ASSERT_EQ(r.stored.size(), 6u);
    ASSERT_TRUE(r.ledger.empty());
  }

  static void TearDownTestSuite() {
    fs::remove_all(*root_);
    delete root_;
  }

  static RunConfig SmallConfig() {
    RunConfig c;
    c.store = (*root_ / "store").string();
    c.seed = 7;
    c.embed_dim = 64;
    c.explain_samples = 5;
    c.explain_permutations = 20;
    return c;
  }

  static fs::path* root_;
};

fs::path* PipelineTest::root_ = nullptr;

TEST_F(PipelineTest, RunProducesArtifactsAndManifest) {
  const fs::path run = *root_ / "run_smoke";
  const RunSummary s = CmdRun(SmallConfig(), run);
  for (const char* name : {"split.json", "catalog.json", "selection.json", "projection.nipm",
                           "model.niml", "model.json", "report.json", "importance.csv",
                           "attributions.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(run / name)) << name;
  }
  EXPECT_EQ(s.n_features, 38u);
  EXPECT_EQ(s.n_selected, 34u);
  const auto manifest = nlohmann::json::parse(ReadAll(s.manifest));
  std::vector<std::string> stages;
  for (const auto& st : manifest.at("stages")) stages.push_back(st.get<std::string>());
  EXPECT_EQ(stages, (std::vector<std::string>{"split", "extract", "select", "embed",
                                              "fit_projection", "transform", "train",
                                              "evaluate", "explain"}));
  EXPECT_EQ(manifest.at("inputs").size(), 6u);
  EXPECT_EQ(manifest.at("config").at("seed"), "7");
  EXPECT_EQ(manifest.at("outputs").at("report.json").at("sha256").get<std::string>().size(), 64u);
  EXPECT_GT(s.accuracy, 0.5);
}

TEST_F(PipelineTest, IdenticalConfigsGiveIdenticalBytes) {
  RunConfig c = SmallConfig();
  c.classifier = "gbt";
  c.gbt_n_rounds = 5;
  CmdRun(c, *root_ / "det_a");
  CmdRun(c, *root_ / "det_b");
  for (const char* name : {"report.json", "model.nigb", "projection.nipm", "importance.csv",
                           "attributions.csv", "selection.json"}) {
    EXPECT_EQ(ReadAll(*root_ / "det_a" / name), ReadAll(*root_ / "det_b" / name)) << name;
  }
}

TEST_F(PipelineTest, StageErrorNamesTheStageAndKeepsEarlierArtifacts) {
  RunConfig c = SmallConfig();
  c.embed_dim = 3;  // smaller than the selected feature count
  const fs::path run = *root_ / "run_fail";
  try {
    CmdRun(c, run);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimension);
    EXPECT_NE(std::string(e.what()).find("stage 'embed'"), std::string::npos) << e.what();
  }
  EXPECT_TRUE(fs::exists(run / "selection.json"));
  EXPECT_FALSE(fs::exists(run / "manifest.json"));
}

TEST_F(PipelineTest, ReportSingleRowHasFootnoteAndMissingReportsFail) {
  const fs::path run = *root_ / "run_report";
  const RunSummary s = CmdRun(SmallConfig(), run);
  const std::string table = CmdReport(std::vector<fs::path>{s.manifest}, false);
  EXPECT_NE(table.find("NormIntSleep-FeatShort-logistic"), std::string::npos) << table;
  EXPECT_NE(table.find('*'), std::string::npos) << table;
  fs::remove(run / "report.json");
  try {
    CmdReport(std::vector<fs::path>{s.manifest}, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kReport);
    EXPECT_NE(std::string(e.what()).find("report.json"), std::string::npos);
  }
}

TEST_F(PipelineTest, IsrucMontageKeepsSeventyEightOfEightySeven) {
  const fs::path dir = FreshDir("isruc");
  SyntheticCorpusOptions opt;
  opt.n_subjects = 4;
  opt.epochs_per_subject = 10;
  opt.sampling_hz = 200;
  opt.channels = IsrucLikeChannels();
  WriteSyntheticCorpus(opt, dir / "edf", dir / "labels");
  CmdIngest({dir / "edf", dir / "labels", dir / "store"});
  RunConfig c;
  c.store = (dir / "store").string();
  c.embed_dim = 128;
  c.explain_samples = 2;
  c.explain_permutations = 4;
  const RunSummary s = CmdRun(c, dir / "run");
  EXPECT_EQ(s.n_features, 87u);
  EXPECT_EQ(s.n_selected, 78u);
  const auto manifest = nlohmann::json::parse(ReadAll(s.manifest));
  EXPECT_EQ(manifest.at("n_selected"), 78);
  fs::remove_all(dir);
}

TEST(IngestTest, PartialFailureIsLedgeredAndReingestIsStable) {
  const fs::path dir = FreshDir("ingest");
  SyntheticCorpusOptions opt;
  opt.n_subjects = 2;
  opt.epochs_per_subject = 4;
  WriteSyntheticCorpus(opt, dir / "edf", dir / "labels");
  {
    std::ofstream bad(dir / "edf" / "corrupt.edf", std::ios::binary);
    bad << "0       this is not an EDF header";
  }
  IngestOptions in{dir / "edf", dir / "labels", dir / "store_a"};
  const IngestResult a = CmdIngest(in);
  EXPECT_EQ(a.stored.size(), 2u);
  ASSERT_EQ(a.ledger.size(), 1u);
  EXPECT_EQ(a.ledger[0].file, "corrupt.edf");
  const auto ledger = nlohmann::json::parse(ReadAll(dir / "store_a" / "ingest_ledger.json"));
  EXPECT_EQ(ledger.at("failures").size(), 1u);

  in.out_store = dir / "store_b";
  CmdIngest(in);
  for (const auto& name : a.stored) {
    EXPECT_EQ(Sha256Hex(ReadFileBytes(dir / "store_a" / name)),
              Sha256Hex(ReadFileBytes(dir / "store_b" / name)));
  }

  const std::string base = "--out " + (dir / "store_c").string() + " ingest --edf-dir " +
                           (dir / "edf").string() + " --label-dir " + (dir / "labels").string();
  EXPECT_EQ(RunCli(base), 2);
  fs::create_directories(dir / "empty");
  EXPECT_EQ(RunCli("--out " + (dir / "store_d").string() + " ingest --edf-dir " +
                   (dir / "empty").string()),
            1);
  try {
    CmdIngest({dir / "empty", {}, dir / "store_e"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUsage);
  }
  fs::remove_all(dir);
}

TEST(CliTest, ExitCodes) {
  EXPECT_EQ(RunCli("--version"), 0);
  EXPECT_EQ(RunCli(""), 1);
  EXPECT_EQ(RunCli("frobnicate"), 1);
  EXPECT_EQ(RunCli("run --store /nonexistent/store --classifier svm"), 1);
}

TEST(CliTest, SynthCorpusIngestAndRun) {
  const fs::path dir = FreshDir("cli");
  const std::string d = dir.string();
  ASSERT_EQ(RunCli("--seed 2 --out " + d + "/corpus synth-corpus --subjects 4 --epochs 10"), 0);
  ASSERT_EQ(RunCli("--out " + d + "/store ingest --edf-dir " + d + "/corpus/edf --label-dir " +
                   d + "/corpus/labels"),
            0);
  ASSERT_EQ(RunCli("--seed 1 --out " + d + "/run --set embed_dim=64 --set explain.samples=2 "
                   "run --store " + d + "/store --classifier tree"),
            0);
  EXPECT_TRUE(fs::exists(dir / "run" / "model.nitr"));
  const auto manifest = nlohmann::json::parse(ReadAll(dir / "run" / "manifest.json"));
  EXPECT_EQ(manifest.at("config").at("classifier"), "\"tree\"");
  EXPECT_EQ(RunCli("--out " + d + "/run report " + d + "/run/manifest.json --csv"), 0);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace nisleep
