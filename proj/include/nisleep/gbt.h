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

// Gradient-boosted regression trees on the softmax cross-entropy.

#ifndef NISLEEP_GBT_H_
#define NISLEEP_GBT_H_

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "nisleep/logistic.h"
#include "nisleep/stage.h"
#include "nisleep/tree.h"

namespace nisleep {

struct GbtOptions {
  int n_rounds = 200;
  double learning_rate = 0.1;
  int max_depth = 4;
  int min_leaf = 1;
  double damping = 1.0;
  bool class_weighted = false;
};

struct BoostedTree {
  int class_index = 0;
  TreeModel tree;
  // Shrinkage actually applied; may be below the configured rate when the
  // full step would have raised the training loss.
  double learning_rate = 0.0;
};

struct BoostedEnsemble {
  ClassWeights base_score;
  std::vector<BoostedTree> trees;  // round-major, five per round
  int n_rounds = 0;
  int n_features = 0;
  // Training loss after each completed round; entry 0 is the base score.
  std::vector<double> training_loss;
};

// Each round fits one regression tree per class to y_k - p_k with Newton
// leaf values, then halves the step until the training loss does not rise.
// Training stops early if no such step exists.
BoostedEnsemble TrainGbt(const Eigen::MatrixXd& x, std::span<const SleepStage> y,
                         const GbtOptions& options = {});

// n x 5 margins base_score + sum of shrunken tree outputs.
Eigen::MatrixXd GbtMargins(const BoostedEnsemble& model, const Eigen::MatrixXd& x);
std::array<double, kNumStages> GbtMargin(const BoostedEnsemble& model,
                                         std::span<const double> x);

// Weighted mean cross-entropy of softmax(margins).
double MultinomialLogLoss(const Eigen::MatrixXd& margins, std::span<const SleepStage> y,
                          std::span<const double> sample_weights = {});

}  // namespace nisleep

#endif  // NISLEEP_GBT_H_
