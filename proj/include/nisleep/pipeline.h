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

// End-to-end orchestration behind the command-line tool.
//
// A run directory accumulates one artifact per stage, and every stage reads
// its inputs from that directory, so stages can be run one at a time or all
// together:
//
//   split           split.json
//   extract         features_{train,test}.nisf, catalog.json
//   select          selection.json, selected_{train,test}.nisf
//   embed           embeddings_{train,test}.nise (+ .json sidecars)
//   fit_projection  projection.nipm
//   transform       representation_{train,test}.nisf
//   train           model.{niml,nitr,nigb} (+ model.json for logistic)
//   evaluate        report.json
//   explain         attributions.csv, importance.csv
//
// A full run finishes by writing manifest.json.

#ifndef NISLEEP_PIPELINE_H_
#define NISLEEP_PIPELINE_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nisleep/config.h"
#include "nisleep/stage.h"

namespace nisleep {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct IngestOptions {
  std::filesystem::path edf_dir;
  // Optional; <stem>.tsv next to each <stem>.edf.
  std::filesystem::path label_dir;
  std::filesystem::path out_store;
  AnnotationSchema schema = AnnotationSchema::kAasm;
  double epoch_len_s = 30.0;
};

struct IngestFailure {
  std::string file;
  std::string error;
};

struct IngestResult {
  std::vector<std::string> stored;  // store file names
  std::vector<IngestFailure> ledger;
};

// Converts every EDF in edf_dir into the epoch store. A file that fails is
// recorded in the ledger (also written to <out_store>/ingest_ledger.json)
// and does not stop the others. An EDF-less directory is a kUsage error.
IngestResult CmdIngest(const IngestOptions& options);

enum class PipelineStage {
  kSplit,
  kExtract,
  kSelect,
  kEmbed,
  kFitProjection,
  kTransform,
  kTrain,
  kEvaluate,
  kExplain,
};

inline constexpr PipelineStage kPipelineOrder[] = {
    PipelineStage::kSplit,         PipelineStage::kExtract,   PipelineStage::kSelect,
    PipelineStage::kEmbed,         PipelineStage::kFitProjection,
    PipelineStage::kTransform,     PipelineStage::kTrain,     PipelineStage::kEvaluate,
    PipelineStage::kExplain};

std::string_view PipelineStageName(PipelineStage stage);

// Runs one stage against `run_dir`. Errors are rethrown with the stage name
// prefixed; artifacts from earlier stages are left in place.
void RunStage(PipelineStage stage, const RunConfig& config,
              const std::filesystem::path& run_dir);

std::string ModelFileName(const RunConfig& config);

struct RunSummary {
  std::filesystem::path manifest;
  std::size_t n_features = 0;
  std::size_t n_selected = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double kappa = 0.0;
};

// All stages in order, then manifest.json (config snapshot, input hashes,
// stage sequence and timings, output hashes, tool version).
RunSummary CmdRun(const RunConfig& config, const std::filesystem::path& run_dir);

// Comparison table over the reports referenced by the given manifests.
std::string CmdReport(std::span<const std::filesystem::path> manifests, bool csv);

}  // namespace nisleep

#endif  // NISLEEP_PIPELINE_H_
