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

#include "nisleep/gbt.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "nisleep/error.h"

namespace nisleep {

namespace {

constexpr int kMaxStepHalvings = 30;

}  // namespace

double MultinomialLogLoss(const Eigen::MatrixXd& margins, std::span<const SleepStage> y,
                          std::span<const double> sample_weights) {
  double loss = 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < margins.rows(); ++i) {
    const double w = sample_weights.empty() ? 1.0 : sample_weights[static_cast<std::size_t>(i)];
    const double m = margins.row(i).maxCoeff();
    const double lse = m + std::log((margins.row(i).array() - m).exp().sum());
    loss += w * (lse - margins(i, static_cast<Eigen::Index>(
                                      StageIndex(y[static_cast<std::size_t>(i)]))));
    total += w;
  }
  return loss / total;
}

BoostedEnsemble TrainGbt(const Eigen::MatrixXd& x, std::span<const SleepStage> y,
                         const GbtOptions& options) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    Fail(ErrorCode::kDimension, "feature rows and label count differ");
  }
  if (!x.allFinite()) Fail(ErrorCode::kData, "training matrix is not finite");
  std::array<double, kNumStages> count{};
  for (SleepStage s : y) count[StageIndex(s)] += 1.0;
  if (std::count_if(count.begin(), count.end(), [](double c) { return c > 0; }) < 2) {
    Fail(ErrorCode::kTraining, "training labels contain fewer than two classes");
  }
  if (options.n_rounds < 0) Fail(ErrorCode::kTraining, "n_rounds must be >= 0");
  if (!(options.learning_rate > 0.0)) Fail(ErrorCode::kTraining, "learning_rate must be > 0");

  const Eigen::Index n = x.rows();
  const std::vector<double> sw =
      options.class_weighted ? BalancedSampleWeights(y) : std::vector<double>{};

  BoostedEnsemble model;
  model.n_features = static_cast<int>(x.cols());
  ClassWeights mass = ClassWeights::Zero();
  for (std::size_t i = 0; i < y.size(); ++i) {
    mass(static_cast<Eigen::Index>(StageIndex(y[i]))) += sw.empty() ? 1.0 : sw[i];
  }
  mass /= mass.sum();
  for (Eigen::Index k = 0; k < mass.size(); ++k) {
    model.base_score(k) = std::log(std::max(mass(k), 1e-12));
  }

  Eigen::MatrixXd margins(n, static_cast<Eigen::Index>(kNumStages));
  margins.rowwise() = model.base_score.transpose();
  double loss = MultinomialLogLoss(margins, y, sw);
  model.training_loss.push_back(loss);

  const ColumnOrders orders = SortColumns(x);
  const RegressionTreeOptions tree_options{options.max_depth, options.min_leaf,
                                           options.damping};
  std::vector<double> targets(static_cast<std::size_t>(n));
  std::vector<double> hessians(static_cast<std::size_t>(n));
  std::vector<double> row(static_cast<std::size_t>(x.cols()));

  for (int round = 0; round < options.n_rounds; ++round) {
    const Eigen::MatrixXd prob = Softmax(margins);
    std::vector<TreeModel> trees;
    Eigen::MatrixXd delta(n, static_cast<Eigen::Index>(kNumStages));
    for (std::size_t k = 0; k < kNumStages; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double w = sw.empty() ? 1.0 : sw[static_cast<std::size_t>(i)];
        const double pk = prob(i, kk);
        const double yk = StageIndex(y[static_cast<std::size_t>(i)]) == k ? 1.0 : 0.0;
        targets[static_cast<std::size_t>(i)] = w * (yk - pk);
        hessians[static_cast<std::size_t>(i)] = w * pk * (1.0 - pk);
      }
      trees.push_back(TrainRegressionTree(x, orders, targets, hessians, tree_options));
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
        delta(i, kk) = TreeValue(trees.back(), row);
      }
    }

    double rate = options.learning_rate;
    bool accepted = false;
    Eigen::MatrixXd candidate;
    double candidate_loss = loss;
    for (int h = 0; h <= kMaxStepHalvings; ++h, rate *= 0.5) {
      candidate = margins + rate * delta;
      candidate_loss = MultinomialLogLoss(candidate, y, sw);
      if (std::isfinite(candidate_loss) && candidate_loss <= loss) {
        accepted = true;
        break;
      }
    }
    if (!std::isfinite(candidate_loss) && !accepted) {
      Fail(ErrorCode::kDivergence, "boosting loss became non-finite in round " +
                                       std::to_string(round));
    }
    if (!accepted) break;
    margins = std::move(candidate);
    loss = candidate_loss;
    for (std::size_t k = 0; k < kNumStages; ++k) {
      model.trees.push_back({static_cast<int>(k), std::move(trees[k]), rate});
    }
    model.training_loss.push_back(loss);
    ++model.n_rounds;
  }
  return model;
}

std::array<double, kNumStages> GbtMargin(const BoostedEnsemble& model,
                                         std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.n_features) {
    Fail(ErrorCode::kDimension, "input has " + std::to_string(x.size()) +
                                    " features, ensemble expects " +
                                    std::to_string(model.n_features));
  }
  std::array<double, kNumStages> m;
  for (std::size_t k = 0; k < kNumStages; ++k) m[k] = model.base_score(static_cast<Eigen::Index>(k));
  for (const BoostedTree& t : model.trees) {
    m[static_cast<std::size_t>(t.class_index)] += t.learning_rate * TreeValue(t.tree, x);
  }
  return m;
}

Eigen::MatrixXd GbtMargins(const BoostedEnsemble& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.n_features) {
    Fail(ErrorCode::kDimension, "input has " + std::to_string(x.cols()) +
                                    " columns, ensemble expects " +
                                    std::to_string(model.n_features));
  }
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(kNumStages));
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
    const auto m = GbtMargin(model, row);
    for (std::size_t k = 0; k < kNumStages; ++k) out(i, static_cast<Eigen::Index>(k)) = m[k];
  }
  return out;
}

}  // namespace nisleep
