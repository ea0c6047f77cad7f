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

// On-disk feature tables: a feature (or representation) matrix together with
// the subjects its rows came from.
//
// Layout: "NISF" | u16 version | u32-prefixed JSON header
// {features, subject_ids, epoch_counts, labels} | n x p float64, row-major.

#ifndef NISLEEP_FEATURE_STORE_H_
#define NISLEEP_FEATURE_STORE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nisleep/features.h"

namespace nisleep {

struct FeatureTable {
  FeatureMatrix matrix;
  // Rows are grouped by subject in this order.
  std::vector<std::string> subject_ids;
  std::vector<std::size_t> epoch_counts;
};

std::vector<std::uint8_t> EncodeFeatureTable(const FeatureTable& table);
FeatureTable DecodeFeatureTable(std::span<const std::uint8_t> bytes);
void SaveFeatureTable(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable LoadFeatureTable(const std::filesystem::path& path);

// JSON list of descriptors with every structured field spelled out.
std::string CatalogManifestJson(std::span<const FeatureDescriptor> descriptors);

}  // namespace nisleep

#endif  // NISLEEP_FEATURE_STORE_H_
