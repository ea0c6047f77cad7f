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

#include "nisleep/logistic.h"

#include <algorithm>
#include <array>
#include <cmath>

#include "nisleep/error.h"

namespace nisleep {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

void CheckInputs(const Eigen::MatrixXd& x, std::span<const SleepStage> y) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    Fail(ErrorCode::kDimension, "feature rows and label count differ");
  }
  if (!x.allFinite()) Fail(ErrorCode::kData, "training matrix is not finite");
  std::array<bool, kNumStages> seen{};
  for (SleepStage s : y) seen[StageIndex(s)] = true;
  if (std::count(seen.begin(), seen.end(), true) < 2) {
    Fail(ErrorCode::kTraining, "training labels contain fewer than two classes");
  }
}

double MaxAbs(const StageWeightMatrix& gw, const ClassWeights& gb) {
  double m = gb.cwiseAbs().maxCoeff();
  if (gw.size() > 0) m = std::max(m, gw.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

Eigen::MatrixXd Softmax(const Eigen::MatrixXd& margins) {
  Eigen::MatrixXd p(margins.rows(), margins.cols());
  for (Eigen::Index i = 0; i < margins.rows(); ++i) {
    const double m = margins.row(i).maxCoeff();
    p.row(i) = (margins.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

std::vector<double> BalancedSampleWeights(std::span<const SleepStage> y) {
  std::array<double, kNumStages> count{};
  for (SleepStage s : y) count[StageIndex(s)] += 1.0;
  const double present = static_cast<double>(
      std::count_if(count.begin(), count.end(), [](double c) { return c > 0; }));
  std::vector<double> w(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    w[i] = static_cast<double>(y.size()) / (present * count[StageIndex(y[i])]);
  }
  return w;
}

LogisticObjective EvaluateLogisticObjective(const StageWeightMatrix& weights,
                                            const ClassWeights& bias,
                                            const Eigen::MatrixXd& x,
                                            std::span<const SleepStage> y, double l2,
                                            std::span<const double> sample_weights) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd margins = x * weights.transpose();
  margins.rowwise() += bias.transpose();

  LogisticObjective out;
  Eigen::MatrixXd residual(n, static_cast<Eigen::Index>(kNumStages));
  double total_weight = 0.0;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = sample_weights.empty() ? 1.0 : sample_weights[static_cast<std::size_t>(i)];
    const double m = margins.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (margins.row(i).array() - m).exp();
    const double z = e.sum();
    const auto k = static_cast<Eigen::Index>(StageIndex(y[static_cast<std::size_t>(i)]));
    loss += w * (std::log(z) + m - margins(i, k));
    residual.row(i) = w * e / z;
    residual(i, k) -= w;
    total_weight += w;
  }
  out.value = loss / total_weight + 0.5 * l2 * weights.squaredNorm();
  out.grad_weights = residual.transpose() * x / total_weight + l2 * weights;
  out.grad_bias = residual.colwise().sum().transpose() / total_weight;
  return out;
}

LogisticModel TrainLogistic(const Eigen::MatrixXd& x, std::span<const SleepStage> y,
                            const LogisticOptions& options) {
  CheckInputs(x, y);
  if (!(options.l2 >= 0.0)) Fail(ErrorCode::kTraining, "l2 must be >= 0");
  if (options.max_iter < 1) Fail(ErrorCode::kTraining, "max_iter must be >= 1");
  const Eigen::Index p = x.cols();
  const std::vector<double> sw =
      options.class_weighted ? BalancedSampleWeights(y) : std::vector<double>{};

  StageWeightMatrix w = options.initial_weights.value_or(
      StageWeightMatrix::Zero(static_cast<Eigen::Index>(kNumStages), p));
  ClassWeights b;
  if (options.initial_bias) {
    b = *options.initial_bias;
  } else {
    ClassWeights mass = ClassWeights::Zero();
    for (std::size_t i = 0; i < y.size(); ++i) {
      mass(static_cast<Eigen::Index>(StageIndex(y[i]))) += sw.empty() ? 1.0 : sw[i];
    }
    mass /= mass.sum();
    for (Eigen::Index k = 0; k < b.size(); ++k) b(k) = std::log(std::max(mass(k), 1e-12));
  }
  if (w.rows() != static_cast<Eigen::Index>(kNumStages) || w.cols() != p) {
    Fail(ErrorCode::kDimension, "initial weights have the wrong shape");
  }

  // A class absent from y has no finite optimal bias (it runs off to -inf),
  // so it is pinned at the prior floor and excluded from the descent.
  std::array<bool, kNumStages> present{};
  for (SleepStage s : y) present[StageIndex(s)] = true;
  for (std::size_t k = 0; k < kNumStages; ++k) {
    if (present[k]) continue;
    w.row(static_cast<Eigen::Index>(k)).setZero();
    b(static_cast<Eigen::Index>(k)) = std::log(1e-12);
  }
  auto evaluate = [&](const StageWeightMatrix& ww, const ClassWeights& bb) {
    LogisticObjective o = EvaluateLogisticObjective(ww, bb, x, y, options.l2, sw);
    for (std::size_t k = 0; k < kNumStages; ++k) {
      if (present[k]) continue;
      o.grad_weights.row(static_cast<Eigen::Index>(k)).setZero();
      o.grad_bias(static_cast<Eigen::Index>(k)) = 0.0;
    }
    return o;
  };

  LogisticObjective obj = evaluate(w, b);
  LogisticModel model;
  model.l2 = options.l2;
  double step = 1.0;
  StageWeightMatrix prev_w;
  ClassWeights prev_b;
  StageWeightMatrix prev_gw;
  ClassWeights prev_gb;
  int it = 0;
  for (; it < options.max_iter; ++it) {
    if (!std::isfinite(obj.value)) {
      Fail(ErrorCode::kDivergence, "logistic objective became non-finite");
    }
    if (MaxAbs(obj.grad_weights, obj.grad_bias) <= options.tol) break;
    if (it > 0) {
      // Barzilai-Borwein: <s, s> / <s, g_k - g_{k-1}>.
      const double ss = (w - prev_w).squaredNorm() + (b - prev_b).squaredNorm();
      const double sy = ((w - prev_w).array() * (obj.grad_weights - prev_gw).array()).sum() +
                        (b - prev_b).dot(obj.grad_bias - prev_gb);
      step = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : 1.0;
    }
    const double g2 =
        obj.grad_weights.squaredNorm() + obj.grad_bias.squaredNorm();
    StageWeightMatrix cand_w;
    ClassWeights cand_b;
    LogisticObjective cand;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      cand_w = w - step * obj.grad_weights;
      cand_b = b - step * obj.grad_bias;
      cand = evaluate(cand_w, cand_b);
      if (std::isfinite(cand.value) && cand.value <= obj.value - kArmijo * step * g2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no representable descent step left
    prev_w = std::move(w);
    prev_b = b;
    prev_gw = std::move(obj.grad_weights);
    prev_gb = obj.grad_bias;
    w = std::move(cand_w);
    b = cand_b;
    obj = std::move(cand);
  }
  if (!std::isfinite(obj.value)) {
    Fail(ErrorCode::kDivergence, "logistic objective became non-finite");
  }
  model.weights = std::move(w);
  model.bias = b;
  model.iterations = it;
  model.final_objective = obj.value;
  model.final_gradient_norm = MaxAbs(obj.grad_weights, obj.grad_bias);
  model.converged = model.final_gradient_norm <= options.tol;
  return model;
}

Eigen::MatrixXd LogisticMargins(const LogisticModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.weights.cols()) {
    Fail(ErrorCode::kDimension, "input has " + std::to_string(x.cols()) +
                                    " columns, model expects " +
                                    std::to_string(model.weights.cols()));
  }
  Eigen::MatrixXd m = x * model.weights.transpose();
  m.rowwise() += model.bias.transpose();
  return m;
}

}  // namespace nisleep
