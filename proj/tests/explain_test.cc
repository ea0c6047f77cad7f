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

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "nisleep/classifier.h"
#include "nisleep/error.h"
#include "nisleep/explain.h"
#include "nisleep/gbt.h"
#include "nisleep/logistic.h"
#include "nisleep/tree.h"
#include "oracles.h"

namespace nisleep {
namespace {

using ::nisleep::testing::RandomMatrix;
using ::nisleep::testing::ShapleyByPermutations;

std::vector<double> Row(const Eigen::MatrixXd& x, Eigen::Index i) {
  std::vector<double> v(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) v[j] = x(i, j);
  return v;
}

std::vector<double> Vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

LogisticModel RandomLinear(int p, std::uint64_t seed) {
  LogisticModel m;
  m.weights = RandomMatrix(5, p, seed);
  m.bias = RandomMatrix(5, 1, seed + 1);
  return m;
}

std::vector<std::string> Names(int p) {
  std::vector<std::string> names;
  for (int j = 0; j < p; ++j) names.push_back("r" + std::to_string(j));
  return names;
}

struct Fitted {
  Eigen::MatrixXd x;
  std::vector<SleepStage> y;
};

Fitted Labeled(int n, int p, std::uint64_t seed) {
  Fitted f{RandomMatrix(n, p, seed), {}};
  for (int i = 0; i < n; ++i) {
    const double s = f.x(i, 0) - 0.7 * f.x(i, 1) + 0.4 * f.x(i, p - 1) * f.x(i, 2);
    f.y.push_back(StageFromIndex(static_cast<std::size_t>(std::clamp((s + 1.6) * 1.6, 0.0, 4.0))));
  }
  return f;
}

TEST(ShapLinearTest, LocalAccuracyAndZeroAtBackground) {
  const LogisticModel m = RandomLinear(7, 1);
  const Eigen::MatrixXd x = RandomMatrix(10, 7, 3);
  const Eigen::VectorXd bg = RandomMatrix(7, 1, 4);
  const AttributionMatrix a = ShapLinear(m, x, bg, Names(7));
  const Eigen::MatrixXd margins = LogisticMargins(m, x);
  for (int i = 0; i < 10; ++i) {
    for (int c = 0; c < 5; ++c) {
      double sum = a.base_values[c];
      for (int j = 0; j < 7; ++j) sum += a.at(i, j, c);
      EXPECT_NEAR(sum, margins(i, c), 1e-10);
    }
  }
  const AttributionMatrix zero = ShapLinear(m, bg.transpose(), bg, Names(7));
  for (double v : zero.values) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(ShapLinear(m, RandomMatrix(2, 6, 1), bg, Names(7)), Error);
}

TEST(ShapEnumTest, LinearModelAgreesWithClosedForm) {
  const LogisticModel m = RandomLinear(6, 5);
  const Eigen::MatrixXd x = RandomMatrix(4, 6, 6);
  const Eigen::VectorXd bg = RandomMatrix(6, 1, 7);
  const AttributionMatrix linear = ShapLinear(m, x, bg, Names(6));
  const MarginFn margin = MarginOf(m);
  for (int i = 0; i < 4; ++i) {
    const ShapleyEstimate e = ShapExactEnum(margin, Row(x, i), Vec(bg));
    for (int j = 0; j < 6; ++j) {
      for (int c = 0; c < 5; ++c) EXPECT_NEAR(e.values(j, c), linear.at(i, j, c), 1e-9);
    }
  }
}

TEST(ShapEnumTest, AdditiveModelGetsComponentDifferences) {
  auto g = [](int j, double v) { return std::sin((j + 1) * v) + v * v * j; };
  const MarginFn margin = [&](std::span<const double> x) {
    std::array<double, 5> out{};
    for (std::size_t j = 0; j < x.size(); ++j) {
      for (int c = 0; c < 5; ++c) out[c] += (c + 1) * g(static_cast<int>(j), x[j]);
    }
    return out;
  };
  const std::vector<double> x = {0.3, -1.2, 2.0, 0.7, -0.4};
  const std::vector<double> bg = {0.1, 0.2, -0.3, 0.0, 1.0};
  const ShapleyEstimate e = ShapExactEnum(margin, x, bg);
  for (int j = 0; j < 5; ++j) {
    for (int c = 0; c < 5; ++c) {
      EXPECT_NEAR(e.values(j, c), (c + 1) * (g(j, x[j]) - g(j, bg[j])), 1e-9);
    }
  }
}

TEST(ShapEnumTest, SymmetryDummyAndEfficiencyOnTree) {
  // Columns 1 and 2 are duplicates; column 3 is never used.
  Fitted f = Labeled(120, 4, 8);
  f.x.col(2) = f.x.col(1);
  Eigen::MatrixXd train = f.x;
  train.col(3).setZero();
  TreeOptions opt;
  opt.max_depth = 2;
  const TreeModel tree = TrainTree(train, f.y, opt);
  const Classifier model = tree;
  const MarginFn margin = MarginOf(model);
  const std::vector<double> bg = Vec(f.x.colwise().mean());
  for (int i = 0; i < 5; ++i) {
    const std::vector<double> x = Row(f.x, i);
    const ShapleyEstimate e = ShapExactEnum(margin, x, bg);
    const auto fx = margin(x);
    const auto fb = margin(bg);
    for (int c = 0; c < 5; ++c) {
      EXPECT_NEAR(e.values.col(c).sum(), fx[c] - fb[c], 1e-9);
      EXPECT_NEAR(e.base_values[c], fb[c], 1e-12);
    }
  }
  // Symmetry requires the two columns to play identical roles in the model.
  const MarginFn symmetric = [&](std::span<const double> x) {
    std::array<double, 5> out{};
    for (int c = 0; c < 5; ++c) out[c] = std::tanh(x[0] * (c + 1)) + x[1] * x[2] * c;
    return out;
  };
  const std::vector<double> x = {0.5, 1.3, 1.3, 9.0};
  const ShapleyEstimate s = ShapExactEnum(symmetric, x, bg);
  for (int c = 0; c < 5; ++c) {
    EXPECT_NEAR(s.values(1, c), s.values(2, c), 1e-9);
    EXPECT_NEAR(s.values(3, c), 0.0, 1e-12);
  }
}

TEST(ShapEnumTest, MatchesPermutationDefinition) {
  const Fitted f = Labeled(150, 5, 9);
  GbtOptions opt;
  opt.n_rounds = 8;
  opt.max_depth = 3;
  const Classifier model = TrainGbt(f.x, f.y, opt);
  const MarginFn margin = MarginOf(model);
  const std::vector<double> bg = Vec(f.x.colwise().mean());
  const testing::Margin as_vector = [&](const std::vector<double>& v) { return margin(v); };
  for (int i = 0; i < 3; ++i) {
    const std::vector<double> x = Row(f.x, i);
    const Eigen::MatrixXd oracle = ShapleyByPermutations(as_vector, x, bg);
    const ShapleyEstimate e = ShapExactEnum(margin, x, bg);
    EXPECT_LE((e.values - oracle).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ShapEnumTest, TooManyFeaturesIsSizeError) {
  const LogisticModel m = RandomLinear(13, 10);
  try {
    ShapExactEnum(MarginOf(m), std::vector<double>(13, 1.0), std::vector<double>(13, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSize);
  }
}

TEST(ShapSamplingTest, WithinThreeStandardErrorsOfEnumeration) {
  const Fitted f = Labeled(200, 8, 11);
  GbtOptions opt;
  opt.n_rounds = 20;
  opt.max_depth = 3;
  const Classifier model = TrainGbt(f.x, f.y, opt);
  const MarginFn margin = MarginOf(model);
  const std::vector<double> bg = Vec(f.x.colwise().mean());
  const std::vector<double> x = Row(f.x, 0);
  const ShapleyEstimate exact = ShapExactEnum(margin, x, bg);
  const ShapleyEstimate est = ShapSampling(margin, x, bg, 2000, 42);
  const Eigen::MatrixXd err = (est.values - exact.values).cwiseAbs();
  EXPECT_TRUE((err.array() <= 3 * est.standard_errors.array() + 1e-12).all())
      << "error\n" << err << "\nse\n" << est.standard_errors;
}

TEST(ShapSamplingTest, ExactOnLinearModelsAndDeterministic) {
  const LogisticModel m = RandomLinear(15, 12);
  const Eigen::MatrixXd x = RandomMatrix(1, 15, 13);
  const Eigen::VectorXd bg = RandomMatrix(15, 1, 14);
  const AttributionMatrix linear = ShapLinear(m, x, bg, Names(15));
  const ShapleyEstimate a = ShapSampling(MarginOf(m), Row(x, 0), Vec(bg), 50, 7);
  const ShapleyEstimate b = ShapSampling(MarginOf(m), Row(x, 0), Vec(bg), 50, 7);
  EXPECT_TRUE((a.values.array() == b.values.array()).all());
  for (int j = 0; j < 15; ++j) {
    for (int c = 0; c < 5; ++c) {
      EXPECT_LE(std::abs(a.values(j, c) - linear.at(0, j, c)), 3 * a.standard_errors(j, c) + 1e-9);
    }
  }
}

TEST(ShapSamplingTest, ErrorShrinksLikeInverseSquareRoot) {
  const Fitted f = Labeled(200, 6, 15);
  GbtOptions opt;
  opt.n_rounds = 10;
  opt.max_depth = 3;
  const Classifier model = TrainGbt(f.x, f.y, opt);
  const MarginFn margin = MarginOf(model);
  const std::vector<double> bg = Vec(f.x.colwise().mean());
  const std::vector<double> x = Row(f.x, 1);
  const ShapleyEstimate exact = ShapExactEnum(margin, x, bg);
  // Root-mean-square error over seeds at n and 16 n permutations.
  auto rms_error = [&](int n) {
    double sum = 0;
    int count = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const ShapleyEstimate e = ShapSampling(margin, x, bg, n, seed);
      sum += (e.values - exact.values).squaredNorm();
      count += static_cast<int>(exact.values.size());
    }
    return std::sqrt(sum / count);
  };
  const double coarse = rms_error(25);
  const double fine = rms_error(400);
  ASSERT_GT(coarse, 0.0);
  // Expected ratio is 4; allow for Monte-Carlo noise in the ratio itself.
  EXPECT_GT(coarse / fine, 2.5);
  EXPECT_LT(coarse / fine, 6.5);
}

TEST(ExplainTest, DispatchAgreesAcrossMethods) {
  const Fitted f = Labeled(100, 5, 16);
  ClassifierOptions opt;
  opt.kind = ClassifierKind::kTree;
  opt.tree.max_depth = 3;
  const Classifier tree = TrainClassifier(f.x, f.y, opt);
  const Eigen::VectorXd bg = f.x.colwise().mean();
  const AttributionMatrix a = ExplainClassifier(tree, f.x.topRows(3), bg, Names(5));
  for (int i = 0; i < 3; ++i) {
    const ShapleyEstimate e = ShapExactEnum(MarginOf(tree), Row(f.x, i), Vec(bg));
    for (int j = 0; j < 5; ++j) {
      for (int c = 0; c < 5; ++c) EXPECT_DOUBLE_EQ(a.at(i, j, c), e.values(j, c));
    }
  }
  const AttributionMatrix again = ExplainClassifier(tree, f.x.topRows(3), bg, Names(5));
  EXPECT_EQ(AttributionToCsv(a), AttributionToCsv(again));
  EXPECT_FALSE(AttributionToJson(a).empty());
}

TEST(SummaryTest, OrderingTiesAndTruncation) {
  AttributionMatrix a;
  a.n = 2;
  a.p = 4;
  a.feature_names = {"d", "c", "b", "a"};
  a.values.assign(2 * 4 * 5, 0.0);
  for (int i = 0; i < 2; ++i) {
    a.at(i, 0, 0) = 0.5;
    a.at(i, 1, 0) = -2.0;
    a.at(i, 3, 0) = i == 0 ? 0.5 : -0.5;
  }
  const ImportanceSummary full = SummarizeImportance(a, 4);
  ASSERT_EQ(full.per_class[0].size(), 4u);
  EXPECT_EQ(full.per_class[0][0].first, "c");
  EXPECT_EQ(full.per_class[0][1].first, "a");  // ties with "d", sorted by name
  EXPECT_EQ(full.per_class[0][2].first, "d");
  EXPECT_EQ(full.per_class[0][3].first, "b");
  EXPECT_EQ(full.per_class[0][3].second, 0.0);
  EXPECT_EQ(SummarizeImportance(a, 2).per_class[0].size(), 2u);
  EXPECT_THROW(SummarizeImportance(a, 5), Error);
  EXPECT_THROW(SummarizeImportance(a, 0), Error);
  EXPECT_NE(ImportanceSummaryToCsv(full).find("c"), std::string::npos);
}

TEST(SummaryTest, GenerativeFeatureRanksFirst) {
  const Eigen::MatrixXd x = RandomMatrix(300, 6, 17);
  std::vector<SleepStage> y;
  for (int i = 0; i < 300; ++i) y.push_back(x(i, 3) > 0 ? SleepStage::kW : SleepStage::kREM);
  const Classifier model = TrainClassifier(x, y, {});
  const AttributionMatrix a = ExplainClassifier(model, x, x.colwise().mean(), Names(6));
  const ImportanceSummary s = SummarizeImportance(a, 3);
  EXPECT_EQ(s.per_class[StageIndex(SleepStage::kW)][0].first, "r3");
  EXPECT_EQ(s.per_class[StageIndex(SleepStage::kREM)][0].first, "r3");
}

}  // namespace
}  // namespace nisleep
