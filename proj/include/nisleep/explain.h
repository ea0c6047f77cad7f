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

// Shapley attributions of per-class pre-softmax margins against a single
// background point (the training mean), and per-class importance summaries.

#ifndef NISLEEP_EXPLAIN_H_
#define NISLEEP_EXPLAIN_H_

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nisleep/classifier.h"
#include "nisleep/logistic.h"
#include "nisleep/stage.h"

namespace nisleep {

using MarginFn = std::function<std::array<double, kNumStages>(std::span<const double>)>;

inline constexpr int kMaxEnumerationFeatures = 12;

// values(j, c) is the attribution of feature j to class c.
using StageAttribution = Eigen::Matrix<double, Eigen::Dynamic, kNumStages>;

struct ShapleyEstimate {
  StageAttribution values;
  StageAttribution standard_errors;  // zero for exact methods
  std::array<double, kNumStages> base_values{};  // margin at the background
};

struct AttributionMatrix {
  int n = 0;
  int p = 0;
  std::vector<double> values;  // n * p * 5, sample-major then feature
  std::array<double, kNumStages> base_values{};
  std::vector<std::string> feature_names;
  Eigen::VectorXd background_mean;

  double at(int sample, int feature, int cls) const {
    return values[(static_cast<std::size_t>(sample) * static_cast<std::size_t>(p) +
                   static_cast<std::size_t>(feature)) * kNumStages +
                  static_cast<std::size_t>(cls)];
  }
  double& at(int sample, int feature, int cls) {
    return values[(static_cast<std::size_t>(sample) * static_cast<std::size_t>(p) +
                   static_cast<std::size_t>(feature)) * kNumStages +
                  static_cast<std::size_t>(cls)];
  }
};

// Closed form for linear margins: phi = W[c, j] * (x_j - bg_j).
AttributionMatrix ShapLinear(const LogisticModel& model, const Eigen::MatrixXd& x,
                             const Eigen::VectorXd& background_mean,
                             std::vector<std::string> feature_names);

// Exact Shapley values by enumerating all 2^p coalitions. Features outside a
// coalition take their background value. p > 12 is a kSize error.
ShapleyEstimate ShapExactEnum(const MarginFn& margin, std::span<const double> x,
                              std::span<const double> background_mean);

// Permutation-sampling estimate with per-feature Monte-Carlo standard
// errors. Deterministic for a fixed seed.
ShapleyEstimate ShapSampling(const MarginFn& margin, std::span<const double> x,
                             std::span<const double> background_mean, int n_permutations,
                             std::uint64_t seed);

// Per-class margins of `model`; the function holds its own copy of the model.
MarginFn MarginOf(const Classifier& model);

struct ExplainOptions {
  int n_permutations = 200;
  std::uint64_t seed = 0;
};

// Linear models use the closed form, models over at most 12 features use
// enumeration, everything else is sampled with a generator seeded from
// (seed, row index).
AttributionMatrix ExplainClassifier(const Classifier& model, const Eigen::MatrixXd& x,
                                    const Eigen::VectorXd& background_mean,
                                    std::vector<std::string> feature_names,
                                    const ExplainOptions& options = {});

struct ImportanceSummary {
  int k = 0;
  // Per class: (feature name, mean |phi|), descending, ties by name.
  std::array<std::vector<std::pair<std::string, double>>, kNumStages> per_class;
};

ImportanceSummary SummarizeImportance(const AttributionMatrix& attr, int k);

// stage,rank,feature,mean_abs_attribution
std::string ImportanceSummaryToCsv(const ImportanceSummary& summary);
// sample,stage,<feature...>; one row per (sample, class).
std::string AttributionToCsv(const AttributionMatrix& attr);
std::string AttributionToJson(const AttributionMatrix& attr);

}  // namespace nisleep

#endif  // NISLEEP_EXPLAIN_H_
