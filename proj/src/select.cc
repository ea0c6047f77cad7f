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

#include "nisleep/select.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "nisleep/error.h"

namespace nisleep {

double AnovaF(std::span<const double> column, std::span<const SleepStage> labels) {
  if (column.size() != labels.size()) {
    Fail(ErrorCode::kSelection, "column and label lengths differ");
  }
  std::array<double, kNumStages> sum{};
  std::array<std::size_t, kNumStages> count{};
  for (std::size_t i = 0; i < column.size(); ++i) {
    sum[StageIndex(labels[i])] += column[i];
    ++count[StageIndex(labels[i])];
  }
  std::size_t groups = 0;
  for (std::size_t c : count) groups += c > 0 ? 1 : 0;
  const std::size_t n = column.size();
  if (groups < 2) Fail(ErrorCode::kSelection, "ANOVA needs at least two groups");
  if (n <= groups) {
    Fail(ErrorCode::kSelection, "ANOVA needs more samples than groups");
  }
  std::array<double, kNumStages> mean{};
  double grand = 0.0;
  for (std::size_t g = 0; g < kNumStages; ++g) {
    if (count[g] > 0) mean[g] = sum[g] / static_cast<double>(count[g]);
    grand += sum[g];
  }
  grand /= static_cast<double>(n);
  double between = 0.0;
  for (std::size_t g = 0; g < kNumStages; ++g) {
    if (count[g] == 0) continue;
    const double d = mean[g] - grand;
    between += static_cast<double>(count[g]) * d * d;
  }
  double within = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = column[i] - mean[StageIndex(labels[i])];
    within += d * d;
  }
  const double df_between = static_cast<double>(groups - 1);
  const double df_within = static_cast<double>(n - groups);
  if (within <= 1e-24 * (between + within)) {
    return between > 0.0 ? kMaximalFScore : 0.0;
  }
  return (between / df_between) / (within / df_within);
}

std::vector<std::string> SelectionMask::kept_names() const {
  std::vector<std::string> out;
  for (std::size_t i : kept_indices) out.push_back(descriptor_names.at(i));
  return out;
}

std::size_t KeepCount(double fraction, std::size_t p) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    Fail(ErrorCode::kSelection, "fraction must lie in (0, 1]");
  }
  const double k = std::round(fraction * static_cast<double>(p));
  return std::min(p, std::max<std::size_t>(1, static_cast<std::size_t>(k)));
}

std::pair<SelectionMask, FeatureMatrix> SelectTopFraction(const FeatureMatrix& fm,
                                                          double fraction) {
  if (!fm.labels.has_value()) {
    Fail(ErrorCode::kSelection, "feature selection needs labels");
  }
  const std::size_t p = fm.descriptors.size();
  if (p == 0) Fail(ErrorCode::kSelection, "no feature columns");
  SelectionMask mask;
  mask.fraction = fraction;
  mask.descriptor_names = fm.names();
  mask.f_scores.resize(p);
  const std::size_t keep = KeepCount(fraction, p);

  std::vector<double> column(static_cast<std::size_t>(fm.rows()));
  for (std::size_t j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < fm.rows(); ++i) {
      column[static_cast<std::size_t>(i)] = fm.values(i, static_cast<Eigen::Index>(j));
    }
    try {
      mask.f_scores[j] = AnovaF(column, *fm.labels);
    } catch (const Error& e) {
      mask.f_scores[j] = -1.0;
      mask.warnings.push_back(mask.descriptor_names[j] + ": " + e.what());
    }
  }

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return mask.f_scores[a] > mask.f_scores[b];
  });
  mask.kept_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));
  std::sort(mask.kept_indices.begin(), mask.kept_indices.end());
  FeatureMatrix reduced = SelectColumns(fm, mask.kept_indices);
  return {std::move(mask), std::move(reduced)};
}

FeatureMatrix ApplyMask(const FeatureMatrix& fm, const SelectionMask& mask) {
  if (fm.descriptors.size() != mask.descriptor_names.size()) {
    Fail(ErrorCode::kDimension,
         "mask was fitted on " + std::to_string(mask.descriptor_names.size()) +
             " columns, matrix has " + std::to_string(fm.descriptors.size()));
  }
  for (std::size_t j = 0; j < fm.descriptors.size(); ++j) {
    if (fm.descriptors[j].name != mask.descriptor_names[j]) {
      Fail(ErrorCode::kDimension, "mask column " + std::to_string(j) + " is '" +
                                      mask.descriptor_names[j] + "', matrix has '" +
                                      fm.descriptors[j].name + "'");
    }
  }
  return SelectColumns(fm, mask.kept_indices);
}

std::string SelectionMaskToJson(const SelectionMask& mask) {
  nlohmann::json j;
  j["fraction"] = mask.fraction;
  j["kept_indices"] = mask.kept_indices;
  j["f_scores"] = mask.f_scores;
  j["descriptor_names"] = mask.descriptor_names;
  j["warnings"] = mask.warnings;
  return j.dump(2) + "\n";
}

SelectionMask SelectionMaskFromJson(const std::string& text) {
  SelectionMask mask;
  try {
    const auto j = nlohmann::json::parse(text);
    mask.fraction = j.at("fraction").get<double>();
    mask.kept_indices = j.at("kept_indices").get<std::vector<std::size_t>>();
    mask.f_scores = j.at("f_scores").get<std::vector<double>>();
    mask.descriptor_names = j.at("descriptor_names").get<std::vector<std::string>>();
    if (j.contains("warnings")) {
      mask.warnings = j.at("warnings").get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("selection mask: ") + e.what());
  }
  for (std::size_t k = 0; k < mask.kept_indices.size(); ++k) {
    if (mask.kept_indices[k] >= mask.descriptor_names.size() ||
        (k > 0 && mask.kept_indices[k] <= mask.kept_indices[k - 1])) {
      Fail(ErrorCode::kStructural, "selection mask indices must be strictly "
                                   "increasing and in range");
    }
  }
  return mask;
}

}  // namespace nisleep
