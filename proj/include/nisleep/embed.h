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

// Embedding provider: external embedding stores and a synthetic generator.
//
// Store layout: "NISE" | u16 version | u64 n_rows | u64 d | n_rows x d
// little-endian float32, row-major. A JSON sidecar at <path>.json records
// {source, subject_ids, epoch_counts} so rows can be matched to records.

#ifndef NISLEEP_EMBED_H_
#define NISLEEP_EMBED_H_

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nisleep/features.h"

namespace nisleep {

enum class EmbeddingSource { kExternalFile, kSynthetic };

inline constexpr std::size_t kReferenceEmbeddingDim = 512;

struct EmbeddingMatrix {
  Eigen::MatrixXd values;  // n_epochs x d
  EmbeddingSource source = EmbeddingSource::kExternalFile;
  // Row provenance: rows are grouped by subject in this order.
  std::vector<std::string> subject_ids;
  std::vector<std::size_t> epoch_counts;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }

  // Rows belonging to `subject_id`. Throws kProvenance if absent.
  Eigen::MatrixXd SubjectRows(const std::string& subject_id) const;
};

void SaveEmbeddings(const std::filesystem::path& path, const EmbeddingMatrix& e);

// Loads a store. With `expected_rows`, a disagreeing row count is a
// kProvenance error; a non-finite entry is a kData error naming its position.
EmbeddingMatrix LoadEmbeddings(const std::filesystem::path& path,
                               std::optional<std::size_t> expected_rows = std::nullopt);

// Column-wise population z-score; constant columns map to 0.
Eigen::MatrixXd Standardize(const Eigen::MatrixXd& x);

// E = standardize(F) * G + 1 u^T + noise_sigma * N, where G (p x d) has
// orthonormal rows, u is a unit vector orthogonal to them (omitted when
// d == p) and N is unit Gaussian noise, all drawn from `seed`. Since
// G G^T = I and G u = 0, standardize(F) = E G^T exactly when
// noise_sigma = 0. Requires d >= p.
EmbeddingMatrix SynthEmbeddings(const FeatureMatrix& fm, std::size_t d,
                                double noise_sigma, std::uint64_t seed);

}  // namespace nisleep

#endif  // NISLEEP_EMBED_H_
