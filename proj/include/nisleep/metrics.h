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

// Evaluation metrics over the five sleep stages and the cross-dataset
// Average Performance aggregate.

#ifndef NISLEEP_METRICS_H_
#define NISLEEP_METRICS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nisleep/stage.h"

namespace nisleep {

// Rows are true stages, columns predicted stages.
using ConfusionMatrix = std::array<std::array<std::int64_t, kNumStages>, kNumStages>;

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

struct EvalReport {
  ConfusionMatrix confusion{};
  std::int64_t n = 0;
  double accuracy = 0.0;
  // Unweighted mean over all five classes; classes absent from both truth
  // and predictions contribute an F1 of 0.
  double macro_f1 = 0.0;
  // 0 when the chance agreement p_e equals 1.
  double kappa = 0.0;
  std::array<ClassScores, kNumStages> per_class{};
};

EvalReport Evaluate(std::span<const SleepStage> y_true, std::span<const SleepStage> y_pred);

// Every scalar in an EvalReport is a function of the confusion matrix alone.
EvalReport ReportFromConfusion(const ConfusionMatrix& confusion);

struct MetricTriple {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double kappa = 0.0;
};

// Unweighted mean rounded to 3 decimals. Empty input is an evaluation error.
double AveragePerformance(std::span<const double> values);
double AveragePerformance(std::span<const MetricTriple> per_dataset);

double RoundDecimals(double value, int decimals);

// Deterministic JSON document for one evaluation.
std::string EvalReportToJson(const EvalReport& report, const std::string& dataset,
                             const std::string& model_id);

struct ReportEntry {
  std::string variant;
  std::string dataset;
  MetricTriple metrics;
  std::string tool_version;
};

// Reads the fields written by EvalReportToJson plus the variant/version
// stored alongside it by the pipeline.
ReportEntry ReportEntryFromJson(const std::string& text);

// Table with one row per variant and an Accuracy/F1/kappa column group per
// dataset. Average Performance is filled for rows scored on at least two
// datasets; otherwise it is blank and a footnote explains why. Mixed tool
// versions produce a warning banner.
std::string FormatComparisonTable(std::span<const ReportEntry> entries, bool csv);

}  // namespace nisleep

#endif  // NISLEEP_METRICS_H_
