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

#ifndef NISLEEP_STAGE_H_
#define NISLEEP_STAGE_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nisleep {

// The five AASM sleep stages. The enumerator order is the confusion-matrix
// and class-index order used everywhere in the library.
enum class SleepStage : int { kW = 0, kN1 = 1, kN2 = 2, kN3 = 3, kREM = 4 };

inline constexpr std::size_t kNumStages = 5;
inline constexpr std::array<SleepStage, kNumStages> kAllStages = {
    SleepStage::kW, SleepStage::kN1, SleepStage::kN2, SleepStage::kN3,
    SleepStage::kREM};

// A per-epoch label. std::nullopt marks an epoch excluded from analysis
// (movement time, unscored).
using StageLabel = std::optional<SleepStage>;

inline constexpr std::size_t StageIndex(SleepStage s) {
  return static_cast<std::size_t>(s);
}
SleepStage StageFromIndex(std::size_t index);

// "W", "N1", "N2", "N3", "REM".
std::string_view StageName(SleepStage s);
// Inverse of StageName; throws kLabeling on anything else.
SleepStage StageFromName(std::string_view name);

enum class AnnotationSchema { kAasm, kRk };

AnnotationSchema SchemaFromName(std::string_view name);

// Maps raw annotation strings to AASM stages. Under R&K, stages 3 and 4 both
// become N3; movement and unknown epochs become std::nullopt.
std::vector<StageLabel> AlignStages(const std::vector<std::string>& raw_labels,
                                    AnnotationSchema schema);

}  // namespace nisleep

#endif  // NISLEEP_STAGE_H_
