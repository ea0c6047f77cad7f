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

// Common front end over the three classifier families: training dispatch,
// prediction, per-class margins for attribution, and model files.

#ifndef NISLEEP_CLASSIFIER_H_
#define NISLEEP_CLASSIFIER_H_

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nisleep/gbt.h"
#include "nisleep/logistic.h"
#include "nisleep/stage.h"
#include "nisleep/tree.h"

namespace nisleep {

enum class ClassifierKind { kLogistic, kTree, kGbt };

// "logistic", "tree", "gbt".
std::string_view ClassifierKindName(ClassifierKind kind);
ClassifierKind ClassifierKindFromName(std::string_view name);

using Classifier = std::variant<LogisticModel, TreeModel, BoostedEnsemble>;

struct ClassifierOptions {
  ClassifierKind kind = ClassifierKind::kLogistic;
  LogisticOptions logistic;
  TreeOptions tree;
  GbtOptions gbt;
};

Classifier TrainClassifier(const Eigen::MatrixXd& x, std::span<const SleepStage> y,
                           const ClassifierOptions& options);

ClassifierKind KindOf(const Classifier& model);
int InputDim(const Classifier& model);

// n x 5, rows sum to one.
Eigen::MatrixXd PredictProba(const Classifier& model, const Eigen::MatrixXd& x);
std::vector<SleepStage> Predict(const Classifier& model, const Eigen::MatrixXd& x);
// Row-wise argmax, ties to the lower class index.
std::vector<SleepStage> ArgmaxStages(const Eigen::MatrixXd& proba);

// Pre-softmax class margins of one row. Trees report log probabilities
// floored at 1e-12.
std::array<double, kNumStages> ClassMargins(const Classifier& model,
                                            std::span<const double> x);

// Versioned binary formats "NIML", "NITR" and "NIGB".
std::vector<std::uint8_t> EncodeClassifier(const Classifier& model);
Classifier DecodeClassifier(std::span<const std::uint8_t> bytes);
void SaveClassifier(const std::filesystem::path& path, const Classifier& model);
Classifier LoadClassifier(const std::filesystem::path& path);

// Human-readable weights: {"classes", "features", "weights", "bias", ...}.
std::string LogisticModelToJson(const LogisticModel& model,
                                std::span<const std::string> feature_names);

}  // namespace nisleep

#endif  // NISLEEP_CLASSIFIER_H_
