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

// Univariate ANOVA feature ranking and top-fraction retention.

#ifndef NISLEEP_SELECT_H_
#define NISLEEP_SELECT_H_

#include <cstddef>
#include <limits>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nisleep/features.h"
#include "nisleep/stage.h"

namespace nisleep {

// Returned by AnovaF when the within-group sum of squares vanishes while the
// between-group sum does not (F = +inf). Ranks above every finite score.
inline constexpr double kMaximalFScore = std::numeric_limits<double>::max();

// One-way ANOVA F statistic of `column` grouped by stage. Groups are the
// stages present in `labels`. Throws kSelection with fewer than two groups or
// n <= number of groups.
double AnovaF(std::span<const double> column, std::span<const SleepStage> labels);

struct SelectionMask {
  double fraction = 1.0;
  std::vector<std::size_t> kept_indices;  // strictly increasing
  std::vector<double> f_scores;           // one per input column
  std::vector<std::string> descriptor_names;  // one per input column
  // Columns whose F statistic could not be computed; they score -1.
  std::vector<std::string> warnings;

  std::vector<std::string> kept_names() const;
};

// max(1, round(fraction * p)), rounding halves away from zero.
std::size_t KeepCount(double fraction, std::size_t p);

// Ranks columns by F (descending, ties to the lower column index) and keeps
// the top KeepCount(fraction, p). The returned matrix keeps the original
// relative column order.
std::pair<SelectionMask, FeatureMatrix> SelectTopFraction(const FeatureMatrix& fm,
                                                          double fraction);

// Applies a mask fitted elsewhere. Column names must match the mask.
FeatureMatrix ApplyMask(const FeatureMatrix& fm, const SelectionMask& mask);

std::string SelectionMaskToJson(const SelectionMask& mask);
SelectionMask SelectionMaskFromJson(const std::string& text);

}  // namespace nisleep

#endif  // NISLEEP_SELECT_H_
