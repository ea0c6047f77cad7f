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

#include "nisleep/tree.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nisleep/error.h"
#include "nisleep/logistic.h"

namespace nisleep {

namespace {

constexpr double kTieTolerance = 1e-12;

struct GiniStats {
  std::array<double, kNumStages> mass{};
  double total = 0.0;
  int count = 0;

  void Add(const GiniStats& o) {
    for (std::size_t k = 0; k < kNumStages; ++k) mass[k] += o.mass[k];
    total += o.total;
    count += o.count;
  }
  GiniStats Minus(const GiniStats& o) const {
    GiniStats r = *this;
    for (std::size_t k = 0; k < kNumStages; ++k) r.mass[k] -= o.mass[k];
    r.total -= o.total;
    r.count -= o.count;
    return r;
  }
  // total * (1 - gini) = sum_k mass_k^2 / total.
  double Score() const {
    if (total <= 0.0) return 0.0;
    double s = 0.0;
    for (double m : mass) s += m * m;
    return s / total;
  }
};

struct SquaredErrorStats {
  double sum = 0.0;
  double hessian = 0.0;
  int count = 0;

  void Add(const SquaredErrorStats& o) {
    sum += o.sum;
    hessian += o.hessian;
    count += o.count;
  }
  SquaredErrorStats Minus(const SquaredErrorStats& o) const {
    return {sum - o.sum, hessian - o.hessian, count - o.count};
  }
  double Score() const { return count > 0 ? sum * sum / count : 0.0; }
};

struct Candidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

bool Improves(const Candidate& best, double gain, double min_gain) {
  if (best.feature < 0) return gain > min_gain;
  return gain > best.gain + kTieTolerance * std::max(1.0, std::abs(best.gain));
}

// Level-wise growth: each level scans every column once in presorted order,
// maintaining running left statistics for every frontier node.
template <typename Stats>
std::vector<Stats> Grow(const Eigen::MatrixXd& x, const ColumnOrders& orders,
                        std::span<const Stats> row_stats, int max_depth, int min_leaf,
                        bool positive_gain_only, std::vector<TreeNode>& nodes) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  nodes.assign(1, TreeNode{});
  std::vector<Stats> totals(1);
  for (const Stats& s : row_stats) totals[0].Add(s);
  std::vector<int> node_of_row(static_cast<std::size_t>(n), 0);
  std::vector<int> frontier = {0};

  for (int depth = 0; depth < max_depth && !frontier.empty(); ++depth) {
    const std::size_t slots = frontier.size();
    std::vector<int> slot_of_node(nodes.size(), -1);
    for (std::size_t s = 0; s < slots; ++s) slot_of_node[frontier[s]] = static_cast<int>(s);
    std::vector<Candidate> best(slots);
    std::vector<double> min_gain(slots, -std::numeric_limits<double>::infinity());
    if (positive_gain_only) {
      for (std::size_t s = 0; s < slots; ++s) {
        min_gain[s] = kTieTolerance * std::max(1.0, totals[frontier[s]].Score());
      }
    }

    for (int f = 0; f < p; ++f) {
      std::vector<Stats> left(slots);
      std::vector<double> prev(slots, 0.0);
      for (int r : orders[static_cast<std::size_t>(f)]) {
        const int s = slot_of_node[node_of_row[static_cast<std::size_t>(r)]];
        if (s < 0) continue;
        const double v = x(r, f);
        Stats& l = left[static_cast<std::size_t>(s)];
        const Stats& total = totals[frontier[static_cast<std::size_t>(s)]];
        if (l.count >= min_leaf && total.count - l.count >= min_leaf &&
            v > prev[static_cast<std::size_t>(s)]) {
          const double gain = l.Score() + total.Minus(l).Score() - total.Score();
          Candidate& b = best[static_cast<std::size_t>(s)];
          if (Improves(b, gain, min_gain[static_cast<std::size_t>(s)])) {
            const double lo = prev[static_cast<std::size_t>(s)];
            double threshold = lo + 0.5 * (v - lo);
            if (!(threshold < v)) threshold = lo;
            b = {f, threshold, gain};
          }
        }
        l.Add(row_stats[static_cast<std::size_t>(r)]);
        prev[static_cast<std::size_t>(s)] = v;
      }
    }

    std::vector<int> next;
    for (std::size_t s = 0; s < slots; ++s) {
      if (best[s].feature < 0) continue;
      const int id = frontier[s];
      const int left_id = static_cast<int>(nodes.size());
      nodes[static_cast<std::size_t>(id)].feature = best[s].feature;
      nodes[static_cast<std::size_t>(id)].threshold = best[s].threshold;
      nodes[static_cast<std::size_t>(id)].left = left_id;
      nodes[static_cast<std::size_t>(id)].right = left_id + 1;
      nodes.resize(nodes.size() + 2);
      totals.resize(nodes.size());
      next.push_back(left_id);
      next.push_back(left_id + 1);
    }
    if (next.empty()) break;
    for (int r = 0; r < n; ++r) {
      const int id = node_of_row[static_cast<std::size_t>(r)];
      const TreeNode& node = nodes[static_cast<std::size_t>(id)];
      if (node.is_leaf()) continue;
      const int child = x(r, node.feature) <= node.threshold ? node.left : node.right;
      node_of_row[static_cast<std::size_t>(r)] = child;
      totals[static_cast<std::size_t>(child)].Add(row_stats[static_cast<std::size_t>(r)]);
    }
    frontier = std::move(next);
  }
  return totals;
}

void CheckShape(const Eigen::MatrixXd& x, std::size_t n_labels) {
  if (static_cast<std::size_t>(x.rows()) != n_labels) {
    Fail(ErrorCode::kDimension, "feature rows and label count differ");
  }
  if (x.rows() == 0) Fail(ErrorCode::kTraining, "training set is empty");
  if (!x.allFinite()) Fail(ErrorCode::kData, "training matrix is not finite");
}

void CheckDepth(int max_depth, int min_leaf) {
  if (max_depth < 1) Fail(ErrorCode::kTraining, "max_depth must be >= 1");
  if (min_leaf < 1) Fail(ErrorCode::kTraining, "min_leaf must be >= 1");
}

}  // namespace

const TreeNode& TreeModel::Leaf(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_features) {
    Fail(ErrorCode::kDimension, "input has " + std::to_string(x.size()) +
                                    " features, tree expects " + std::to_string(n_features));
  }
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf()) {
    node = &nodes[static_cast<std::size_t>(
        x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left
                                                                      : node->right)];
  }
  return *node;
}

int TreeModel::Depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) continue;
    for (int c : {nodes[i].left, nodes[i].right}) {
      depth[static_cast<std::size_t>(c)] = depth[i] + 1;
      deepest = std::max(deepest, depth[i] + 1);
    }
  }
  return deepest;
}

int TreeModel::LeafCount() const {
  return static_cast<int>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

ColumnOrders SortColumns(const Eigen::MatrixXd& x) {
  ColumnOrders orders(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    auto& o = orders[static_cast<std::size_t>(f)];
    o.resize(static_cast<std::size_t>(x.rows()));
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](int a, int b) { return x(a, f) < x(b, f); });
  }
  return orders;
}

TreeModel TrainTree(const Eigen::MatrixXd& x, std::span<const SleepStage> y,
                    const TreeOptions& options) {
  CheckShape(x, y.size());
  CheckDepth(options.max_depth, options.min_leaf);
  const std::vector<double> weights =
      options.class_weighted ? BalancedSampleWeights(y) : std::vector<double>(y.size(), 1.0);
  std::vector<GiniStats> rows(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    rows[i].mass[StageIndex(y[i])] = weights[i];
    rows[i].total = weights[i];
    rows[i].count = 1;
  }
  TreeModel model;
  model.max_depth = options.max_depth;
  model.n_features = static_cast<int>(x.cols());
  const std::vector<GiniStats> totals =
      Grow<GiniStats>(x, SortColumns(x), rows, options.max_depth, options.min_leaf,
                      /*positive_gain_only=*/true, model.nodes);
  for (std::size_t i = 0; i < model.nodes.size(); ++i) {
    if (!model.nodes[i].is_leaf()) continue;
    for (std::size_t k = 0; k < kNumStages; ++k) {
      model.nodes[i].distribution[k] = totals[i].mass[k] / totals[i].total;
    }
  }
  return model;
}

TreeModel TrainRegressionTree(const Eigen::MatrixXd& x, const ColumnOrders& orders,
                              std::span<const double> targets,
                              std::span<const double> hessians,
                              const RegressionTreeOptions& options) {
  CheckShape(x, targets.size());
  CheckDepth(options.max_depth, options.min_leaf);
  if (hessians.size() != targets.size()) {
    Fail(ErrorCode::kDimension, "hessian and target lengths differ");
  }
  std::vector<SquaredErrorStats> rows(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) rows[i] = {targets[i], hessians[i], 1};
  TreeModel model;
  model.max_depth = options.max_depth;
  model.n_features = static_cast<int>(x.cols());
  const std::vector<SquaredErrorStats> totals =
      Grow<SquaredErrorStats>(x, orders, rows, options.max_depth, options.min_leaf,
                              /*positive_gain_only=*/false, model.nodes);
  for (std::size_t i = 0; i < model.nodes.size(); ++i) {
    if (model.nodes[i].is_leaf()) {
      model.nodes[i].value = totals[i].sum / (totals[i].hessian + options.damping);
    }
  }
  return model;
}

Eigen::MatrixXd TreeProba(const TreeModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.n_features) {
    Fail(ErrorCode::kDimension, "input has " + std::to_string(x.cols()) +
                                    " columns, tree expects " +
                                    std::to_string(model.n_features));
  }
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(kNumStages));
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
    const auto& d = model.Leaf(row).distribution;
    for (std::size_t k = 0; k < kNumStages; ++k) out(i, static_cast<Eigen::Index>(k)) = d[k];
  }
  return out;
}

double TreeValue(const TreeModel& model, std::span<const double> x) {
  return model.Leaf(x).value;
}

}  // namespace nisleep
