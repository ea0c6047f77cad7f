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

// Binary decision trees: a CART classifier and the regression trees used
// inside the boosted ensemble.

#ifndef NISLEEP_TREE_H_
#define NISLEEP_TREE_H_

#include <Eigen/Dense>

#include <array>
#include <span>
#include <vector>

#include "nisleep/stage.h"

namespace nisleep {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  std::array<double, kNumStages> distribution{};  // classification leaves
  double value = 0.0;                              // regression leaves

  bool is_leaf() const { return feature < 0; }
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int max_depth = 1;
  int n_features = 0;

  const TreeNode& Leaf(std::span<const double> x) const;
  int Depth() const;
  int LeafCount() const;
};

struct TreeOptions {
  int max_depth = 8;
  int min_leaf = 1;
  bool class_weighted = false;
};

struct RegressionTreeOptions {
  int max_depth = 4;
  int min_leaf = 1;
  // Added to the hessian sum in the Newton leaf value.
  double damping = 1.0;
};

// Per-column row orders sorted by value, ties by row index.
using ColumnOrders = std::vector<std::vector<int>>;
ColumnOrders SortColumns(const Eigen::MatrixXd& x);

// CART on Gini impurity decrease. A node is split only when the decrease is
// positive; ties go to the lower feature index, then the lower threshold.
TreeModel TrainTree(const Eigen::MatrixXd& x, std::span<const SleepStage> y,
                    const TreeOptions& options = {});

// Least-squares regression tree on `targets`. Splits maximize the squared
// error reduction (zero-gain splits are allowed); leaves hold
// sum(targets) / (sum(hessians) + damping).
TreeModel TrainRegressionTree(const Eigen::MatrixXd& x, const ColumnOrders& orders,
                              std::span<const double> targets,
                              std::span<const double> hessians,
                              const RegressionTreeOptions& options);

// n x 5 leaf distributions.
Eigen::MatrixXd TreeProba(const TreeModel& model, const Eigen::MatrixXd& x);

// Regression output for one row.
double TreeValue(const TreeModel& model, std::span<const double> x);

}  // namespace nisleep

#endif  // NISLEEP_TREE_H_
