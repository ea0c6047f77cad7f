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

#include "nisleep/explain.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "nisleep/error.h"

namespace nisleep {

namespace {

constexpr std::uint32_t kSampleStream = 0x3c6ef372;

void CheckWidths(std::size_t x, std::size_t bg) {
  if (x != bg) {
    Fail(ErrorCode::kAttribution, "input has " + std::to_string(x) +
                                      " features but the background has " +
                                      std::to_string(bg));
  }
}

std::array<double, kNumStages> Evaluate(const MarginFn& margin, std::span<const double> z) {
  const auto m = margin(z);
  for (double v : m) {
    if (!std::isfinite(v)) Fail(ErrorCode::kAttribution, "margin is not finite");
  }
  return m;
}

std::string ShortestDouble(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

AttributionMatrix ShapLinear(const LogisticModel& model, const Eigen::MatrixXd& x,
                             const Eigen::VectorXd& background_mean,
                             std::vector<std::string> feature_names) {
  const Eigen::Index p = model.weights.cols();
  if (x.cols() != p || background_mean.size() != p) {
    Fail(ErrorCode::kAttribution, "attribution inputs do not match the model width " +
                                      std::to_string(p));
  }
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != p) {
    Fail(ErrorCode::kAttribution, "feature name count does not match the model width");
  }
  AttributionMatrix a;
  a.n = static_cast<int>(x.rows());
  a.p = static_cast<int>(p);
  a.values.resize(static_cast<std::size_t>(a.n) * static_cast<std::size_t>(a.p) * kNumStages);
  a.feature_names = std::move(feature_names);
  a.background_mean = background_mean;
  const ClassWeights base = model.weights * background_mean + model.bias;
  for (std::size_t c = 0; c < kNumStages; ++c) a.base_values[c] = base(static_cast<Eigen::Index>(c));
  for (int i = 0; i < a.n; ++i) {
    for (int j = 0; j < a.p; ++j) {
      const double dx = x(i, j) - background_mean(j);
      for (int c = 0; c < static_cast<int>(kNumStages); ++c) {
        a.at(i, j, c) = model.weights(c, j) * dx;
      }
    }
  }
  return a;
}

ShapleyEstimate ShapExactEnum(const MarginFn& margin, std::span<const double> x,
                              std::span<const double> background_mean) {
  CheckWidths(x.size(), background_mean.size());
  const int p = static_cast<int>(x.size());
  if (p > kMaxEnumerationFeatures) {
    Fail(ErrorCode::kSize, "exact enumeration supports at most " +
                               std::to_string(kMaxEnumerationFeatures) + " features, got " +
                               std::to_string(p) + "; use the sampling estimator");
  }
  const std::size_t subsets = std::size_t{1} << p;
  std::vector<std::array<double, kNumStages>> value(subsets);
  std::vector<double> z(background_mean.begin(), background_mean.end());
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    for (int j = 0; j < p; ++j) {
      z[static_cast<std::size_t>(j)] = (mask >> j) & 1 ? x[static_cast<std::size_t>(j)]
                                                       : background_mean[static_cast<std::size_t>(j)];
    }
    value[mask] = Evaluate(margin, z);
  }
  // weight[s] = s! (p - s - 1)! / p!
  std::vector<double> weight(static_cast<std::size_t>(std::max(p, 1)));
  for (int s = 0; s < p; ++s) {
    weight[static_cast<std::size_t>(s)] =
        std::exp(std::lgamma(s + 1.0) + std::lgamma(p - s + 0.0) - std::lgamma(p + 1.0));
  }
  ShapleyEstimate out;
  out.values = StageAttribution::Zero(p, kNumStages);
  out.standard_errors = StageAttribution::Zero(p, kNumStages);
  out.base_values = value[0];
  for (int j = 0; j < p; ++j) {
    const std::size_t bit = std::size_t{1} << j;
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      if (mask & bit) continue;
      const double w = weight[static_cast<std::size_t>(std::popcount(mask))];
      for (std::size_t c = 0; c < kNumStages; ++c) {
        out.values(j, static_cast<Eigen::Index>(c)) += w * (value[mask | bit][c] - value[mask][c]);
      }
    }
  }
  return out;
}

ShapleyEstimate ShapSampling(const MarginFn& margin, std::span<const double> x,
                             std::span<const double> background_mean, int n_permutations,
                             std::uint64_t seed) {
  CheckWidths(x.size(), background_mean.size());
  if (n_permutations < 1) Fail(ErrorCode::kAttribution, "n_permutations must be >= 1");
  const int p = static_cast<int>(x.size());
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    kSampleStream};
  std::mt19937_64 rng(seq);

  ShapleyEstimate out;
  out.base_values = Evaluate(margin, background_mean);
  StageAttribution mean = StageAttribution::Zero(p, kNumStages);
  StageAttribution m2 = StageAttribution::Zero(p, kNumStages);
  std::vector<int> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> z(background_mean.begin(), background_mean.end());
  for (int t = 1; t <= n_permutations; ++t) {
    std::shuffle(order.begin(), order.end(), rng);
    std::copy(background_mean.begin(), background_mean.end(), z.begin());
    auto prev = out.base_values;
    for (int j : order) {
      z[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)];
      const auto cur = Evaluate(margin, z);
      for (std::size_t c = 0; c < kNumStages; ++c) {
        const auto cc = static_cast<Eigen::Index>(c);
        const double delta = cur[c] - prev[c];
        const double d0 = delta - mean(j, cc);
        mean(j, cc) += d0 / t;
        m2(j, cc) += d0 * (delta - mean(j, cc));
      }
      prev = cur;
    }
  }
  out.values = mean;
  out.standard_errors = StageAttribution::Zero(p, kNumStages);
  if (n_permutations > 1) {
    out.standard_errors =
        (m2.array() / (n_permutations - 1.0) / static_cast<double>(n_permutations)).sqrt();
  }
  return out;
}

MarginFn MarginOf(const Classifier& model) {
  auto held = std::make_shared<const Classifier>(model);
  return [held](std::span<const double> z) { return ClassMargins(*held, z); };
}

AttributionMatrix ExplainClassifier(const Classifier& model, const Eigen::MatrixXd& x,
                                    const Eigen::VectorXd& background_mean,
                                    std::vector<std::string> feature_names,
                                    const ExplainOptions& options) {
  if (const auto* linear = std::get_if<LogisticModel>(&model)) {
    return ShapLinear(*linear, x, background_mean, std::move(feature_names));
  }
  const int p = InputDim(model);
  if (x.cols() != p || background_mean.size() != p) {
    Fail(ErrorCode::kAttribution, "attribution inputs do not match the model width " +
                                      std::to_string(p));
  }
  AttributionMatrix a;
  a.n = static_cast<int>(x.rows());
  a.p = p;
  a.values.resize(static_cast<std::size_t>(a.n) * static_cast<std::size_t>(p) * kNumStages);
  a.feature_names = std::move(feature_names);
  a.background_mean = background_mean;
  const MarginFn margin = MarginOf(model);
  const std::span<const double> bg(background_mean.data(),
                                   static_cast<std::size_t>(background_mean.size()));
  a.base_values = Evaluate(margin, bg);
  std::vector<double> row(static_cast<std::size_t>(p));
  for (int i = 0; i < a.n; ++i) {
    for (int j = 0; j < p; ++j) row[static_cast<std::size_t>(j)] = x(i, j);
    const ShapleyEstimate e =
        p <= kMaxEnumerationFeatures
            ? ShapExactEnum(margin, row, bg)
            : ShapSampling(margin, row, bg, options.n_permutations,
                           options.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(i));
    for (int j = 0; j < p; ++j) {
      for (int c = 0; c < static_cast<int>(kNumStages); ++c) a.at(i, j, c) = e.values(j, c);
    }
  }
  return a;
}

ImportanceSummary SummarizeImportance(const AttributionMatrix& attr, int k) {
  if (k < 1 || k > attr.p) {
    Fail(ErrorCode::kAttribution, "k must lie in [1, " + std::to_string(attr.p) + "]");
  }
  if (static_cast<int>(attr.feature_names.size()) != attr.p) {
    Fail(ErrorCode::kAttribution, "attribution matrix has no feature names");
  }
  ImportanceSummary s;
  s.k = k;
  for (int c = 0; c < static_cast<int>(kNumStages); ++c) {
    std::vector<std::pair<std::string, double>> ranked;
    for (int j = 0; j < attr.p; ++j) {
      double total = 0.0;
      for (int i = 0; i < attr.n; ++i) total += std::abs(attr.at(i, j, c));
      ranked.emplace_back(attr.feature_names[static_cast<std::size_t>(j)],
                          attr.n > 0 ? total / attr.n : 0.0);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    ranked.resize(static_cast<std::size_t>(k));
    s.per_class[static_cast<std::size_t>(c)] = std::move(ranked);
  }
  return s;
}

std::string ImportanceSummaryToCsv(const ImportanceSummary& summary) {
  std::ostringstream os;
  os << "stage,rank,feature,mean_abs_attribution\n";
  for (std::size_t c = 0; c < kNumStages; ++c) {
    const auto& list = summary.per_class[c];
    for (std::size_t r = 0; r < list.size(); ++r) {
      os << StageName(StageFromIndex(c)) << ',' << r + 1 << ",\"" << list[r].first << "\","
         << ShortestDouble(list[r].second) << '\n';
    }
  }
  return os.str();
}

std::string AttributionToCsv(const AttributionMatrix& attr) {
  std::ostringstream os;
  os << "sample,stage";
  for (const auto& name : attr.feature_names) os << ",\"" << name << '"';
  os << '\n';
  for (int i = 0; i < attr.n; ++i) {
    for (int c = 0; c < static_cast<int>(kNumStages); ++c) {
      os << i << ',' << StageName(StageFromIndex(static_cast<std::size_t>(c)));
      for (int j = 0; j < attr.p; ++j) os << ',' << ShortestDouble(attr.at(i, j, c));
      os << '\n';
    }
  }
  return os.str();
}

std::string AttributionToJson(const AttributionMatrix& attr) {
  nlohmann::ordered_json j;
  j["feature_names"] = attr.feature_names;
  j["base_values"] = attr.base_values;
  j["background_mean"] = std::vector<double>(
      attr.background_mean.data(), attr.background_mean.data() + attr.background_mean.size());
  auto& samples = j["values"] = nlohmann::ordered_json::array();
  for (int i = 0; i < attr.n; ++i) {
    auto& per_feature = samples.emplace_back(nlohmann::ordered_json::array());
    for (int f = 0; f < attr.p; ++f) {
      std::array<double, kNumStages> v;
      for (int c = 0; c < static_cast<int>(kNumStages); ++c) v[static_cast<std::size_t>(c)] = attr.at(i, f, c);
      per_feature.push_back(v);
    }
  }
  return j.dump(2) + "\n";
}

}  // namespace nisleep
