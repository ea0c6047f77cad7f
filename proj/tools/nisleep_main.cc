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

// nisleep command-line tool.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical error.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nisleep/binary_io.h"
#include "nisleep/config.h"
#include "nisleep/error.h"
#include "nisleep/pipeline.h"
#include "nisleep/synthetic.h"

namespace {

namespace fs = std::filesystem;
using nisleep::PipelineStage;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Flag name -> config key; a flag given on the command line overrides both the
// config file and the built-in default.
struct FlagBinding {
  CLI::Option* option = nullptr;
  std::string key;
  std::string value;
};

class Overrides {
 public:
  void Add(CLI::App* app, const std::string& flag, const std::string& key,
           const std::string& help) {
    auto binding = std::make_unique<FlagBinding>();
    binding->key = key;
    binding->option = app->add_option(flag, binding->value, help);
    bindings_.push_back(std::move(binding));
  }

  void Apply(nisleep::RunConfig& config) const {
    for (const auto& b : bindings_) {
      if (b->option->count() > 0) nisleep::ApplyConfigValue(config, b->key, b->value);
    }
  }

 private:
  std::vector<std::unique_ptr<FlagBinding>> bindings_;
};

std::string ReadTextFile(const fs::path& path) {
  const auto bytes = nisleep::ReadFileBytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void PrintSummary(const nisleep::RunSummary& s) {
  std::cout << "features: " << s.n_features << ", selected: " << s.n_selected << "\n"
            << "accuracy " << s.accuracy << ", macro F1 " << s.macro_f1 << ", kappa "
            << s.kappa << "\n"
            << "manifest: " << s.manifest.string() << "\n";
}

int Main(int argc, char** argv) {
  CLI::App app{"Interpretable sleep staging: features, ridge projection, simple "
               "classifiers and Shapley explanations."};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  app.set_version_flag("--version", std::string(nisleep::kToolVersion));

  std::string config_file;
  std::string out = "nisleep_run";
  std::vector<std::string> sets;
  app.add_option("--config", config_file, "TOML-style key = value configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--out", out, "Output directory (run directory or epoch store)");
  Overrides globals;
  globals.Add(&app, "--seed", "seed", "Seed for splitting, embeddings and sampling");
  app.add_option("--set", sets, "Override any config key: --set key=value (repeatable)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Convert EDF recordings into an epoch store");
  std::string edf_dir;
  std::string label_dir;
  std::string schema = "aasm";
  double epoch_len = 30.0;
  ingest->add_option("--edf-dir", edf_dir, "Directory of .edf files")->required();
  ingest->add_option("--label-dir", label_dir, "Directory of <stem>.tsv label files");
  ingest->add_option("--schema", schema, "Annotation schema: aasm or rk");
  ingest->add_option("--epoch-len", epoch_len, "Epoch length in seconds");

  // Pipeline stages.
  Overrides stage_flags;
  auto* features = app.add_subcommand("features", "Split subjects and extract features");
  stage_flags.Add(features, "--store", "store", "Epoch store directory");
  stage_flags.Add(features, "--catalog", "catalog", "FeatShort or FeatLong");
  stage_flags.Add(features, "--train-fraction", "train_fraction", "Fraction of subjects for training");
  auto* select = app.add_subcommand("select", "ANOVA feature selection on the training split");
  stage_flags.Add(select, "--fraction", "select_fraction", "Fraction of features kept");
  auto* embed = app.add_subcommand("embed-synth", "Synthesize embeddings from selected features");
  stage_flags.Add(embed, "--dim", "embed_dim", "Embedding dimension");
  stage_flags.Add(embed, "--noise", "embed_noise", "Gaussian noise level");
  auto* project = app.add_subcommand("project", "Fit the ridge projection and normalize");
  stage_flags.Add(project, "--lambda", "lambda", "Ridge penalty");
  auto* train = app.add_subcommand("train", "Train a classifier on the representation");
  stage_flags.Add(train, "--classifier", "classifier", "logistic, tree or gbt");
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate the classifier on the test split");
  auto* explain = app.add_subcommand("explain", "Shapley attributions and importance summary");
  stage_flags.Add(explain, "--samples", "explain.samples", "Test rows to explain (0 = all)");
  stage_flags.Add(explain, "--permutations", "explain.permutations", "Sampling permutations");
  stage_flags.Add(explain, "--top-k", "explain.top_k", "Features per class in the summary");
  stage_flags.Add(evaluate, "--classifier", "classifier", "logistic, tree or gbt");
  stage_flags.Add(explain, "--classifier", "classifier", "logistic, tree or gbt");

  auto* run = app.add_subcommand("run", "Run every stage and write a manifest");
  stage_flags.Add(run, "--store", "store", "Epoch store directory");
  stage_flags.Add(run, "--catalog", "catalog", "FeatShort or FeatLong");
  stage_flags.Add(run, "--classifier", "classifier", "logistic, tree or gbt");
  stage_flags.Add(run, "--fraction", "select_fraction", "Fraction of features kept");
  stage_flags.Add(run, "--lambda", "lambda", "Ridge penalty");
  stage_flags.Add(run, "--embeddings", "embeddings", "'synthetic' or an embedding store path");
  stage_flags.Add(run, "--dataset", "dataset", "Dataset name used in reports");

  auto* report = app.add_subcommand("report", "Tabulate the reports behind run manifests");
  std::vector<std::string> manifests;
  bool csv = false;
  report->add_option("manifests", manifests, "manifest.json files")->required();
  report->add_flag("--csv", csv, "Emit CSV instead of an aligned text table");

  auto* synth = app.add_subcommand("synth-corpus", "Write a synthetic EDF corpus with labels");
  int subjects = 6;
  int epochs = 40;
  std::string montage = "physionet";
  double noise = 0.3;
  synth->add_option("--subjects", subjects, "Number of subjects");
  synth->add_option("--epochs", epochs, "Epochs per subject");
  synth->add_option("--montage", montage, "physionet (4 channels, 100 Hz) or isruc (9, 200 Hz)");
  synth->add_option("--noise", noise, "Noise relative to the dominant rhythm");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  nisleep::RunConfig config;
  if (!config_file.empty()) nisleep::ApplyConfigText(config, ReadTextFile(config_file));
  globals.Apply(config);
  stage_flags.Apply(config);
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      nisleep::Fail(nisleep::ErrorCode::kUsage, "--set expects key=value, got '" + s + "'");
    }
    nisleep::ApplyConfigValue(config, s.substr(0, eq), s.substr(eq + 1));
  }
  const fs::path out_dir = out;

  if (ingest->parsed()) {
    nisleep::IngestOptions options;
    options.edf_dir = edf_dir;
    options.label_dir = label_dir;
    options.out_store = out_dir;
    options.schema = nisleep::SchemaFromName(schema);
    options.epoch_len_s = epoch_len;
    const nisleep::IngestResult result = nisleep::CmdIngest(options);
    std::cout << "stored " << result.stored.size() << " record(s) in " << out_dir.string()
              << "\n";
    for (const auto& f : result.ledger) std::cerr << f.file << ": " << f.error << "\n";
    if (!result.ledger.empty()) {
      std::cerr << result.ledger.size() << " file(s) failed; see "
                << (out_dir / "ingest_ledger.json").string() << "\n";
      return kExitData;
    }
    return 0;
  }
  if (report->parsed()) {
    std::vector<fs::path> paths(manifests.begin(), manifests.end());
    std::cout << nisleep::CmdReport(paths, csv);
    return 0;
  }
  if (synth->parsed()) {
    nisleep::SyntheticCorpusOptions options;
    options.n_subjects = subjects;
    options.epochs_per_subject = epochs;
    options.noise = noise;
    options.seed = config.seed;
    if (montage == "isruc") {
      options.channels = nisleep::IsrucLikeChannels();
      options.sampling_hz = 200.0;
    } else if (montage != "physionet") {
      nisleep::Fail(nisleep::ErrorCode::kUsage, "unknown montage '" + montage + "'");
    }
    nisleep::WriteSyntheticCorpus(options, out_dir / "edf", out_dir / "labels");
    std::cout << "wrote " << subjects << " subject(s) to " << out_dir.string() << "\n";
    return 0;
  }
  if (run->parsed()) {
    PrintSummary(nisleep::CmdRun(config, out_dir));
    return 0;
  }

  const std::map<CLI::App*, std::vector<PipelineStage>> stages = {
      {features, {PipelineStage::kSplit, PipelineStage::kExtract}},
      {select, {PipelineStage::kSelect}},
      {embed, {PipelineStage::kEmbed}},
      {project, {PipelineStage::kFitProjection, PipelineStage::kTransform}},
      {train, {PipelineStage::kTrain}},
      {evaluate, {PipelineStage::kEvaluate}},
      {explain, {PipelineStage::kExplain}},
  };
  for (const auto& [sub, list] : stages) {
    if (!sub->parsed()) continue;
    if (sub == embed) config.embeddings = "synthetic";
    for (PipelineStage s : list) {
      nisleep::RunStage(s, config, out_dir);
      std::cout << nisleep::PipelineStageName(s) << ": done\n";
    }
    return 0;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Main(argc, argv);
  } catch (const nisleep::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
