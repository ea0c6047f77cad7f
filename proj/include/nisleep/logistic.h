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

// Multinomial logistic regression over the five sleep stages.

#ifndef NISLEEP_LOGISTIC_H_
#define NISLEEP_LOGISTIC_H_

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

#include "nisleep/stage.h"

namespace nisleep {

using ClassWeights = Eigen::Matrix<double, kNumStages, 1>;
using StageWeightMatrix = Eigen::Matrix<double, kNumStages, Eigen::Dynamic>;

struct LogisticOptions {
  double l2 = 1e-4;
  int max_iter = 500;
  double tol = 1e-6;
  // Reweights samples by n / (K * count(class)).
  bool class_weighted = false;
  // Starting point; defaults to W = 0 and b = log class priors.
  std::optional<StageWeightMatrix> initial_weights;
  std::optional<ClassWeights> initial_bias;
};

struct LogisticModel {
  StageWeightMatrix weights;  // 5 x p
  ClassWeights bias;
  double l2 = 0.0;
  int iterations = 0;
  double final_objective = 0.0;
  // Max-abs gradient over the free parameters (absent classes are pinned).
  double final_gradient_norm = 0.0;
  bool converged = false;
};

struct LogisticObjective {
  double value = 0.0;
  StageWeightMatrix grad_weights;
  ClassWeights grad_bias;
};

// Weighted mean cross-entropy plus (l2 / 2) ||W||^2, and its gradient.
// `sample_weights` may be empty (all ones).
LogisticObjective EvaluateLogisticObjective(const StageWeightMatrix& weights,
                                            const ClassWeights& bias,
                                            const Eigen::MatrixXd& x,
                                            std::span<const SleepStage> y,
                                            double l2,
                                            std::span<const double> sample_weights = {});

// Full-batch gradient descent. Each iteration tries a Barzilai-Borwein step
// and backtracks until the Armijo condition holds. Stops when the gradient
// max-abs drops to `tol` or after max_iter iterations.
LogisticModel TrainLogistic(const Eigen::MatrixXd& x, std::span<const SleepStage> y,
                            const LogisticOptions& options = {});

// n x 5 pre-softmax margins X W^T + b.
Eigen::MatrixXd LogisticMargins(const LogisticModel& model, const Eigen::MatrixXd& x);

// Per-sample weights n / (K * count(class)), K = number of present classes.
std::vector<double> BalancedSampleWeights(std::span<const SleepStage> y);

// Row-wise softmax, stabilized by the row maximum.
Eigen::MatrixXd Softmax(const Eigen::MatrixXd& margins);

}  // namespace nisleep

#endif  // NISLEEP_LOGISTIC_H_
