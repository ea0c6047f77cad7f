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

// Ridge projection from embedding space onto the (selected) feature space,
// and the normalized interpretable representation built from it.
//
//   T  = argmin ||E T - F||^2 + lambda ||T||^2 = (E^T E + lambda I)^-1 E^T F
//   R  = E T
//   R' = (R - mu_R) / sigma_R
//
// mu_R and sigma_R are the per-column mean and population (1/N) standard
// deviation of R over the fitting rows. There is no intercept term.

#ifndef NISLEEP_PROJECT_H_
#define NISLEEP_PROJECT_H_

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nisleep/embed.h"
#include "nisleep/features.h"

namespace nisleep {

inline constexpr double kDefaultRidgeLambda = 1.0;

struct ProjectionModel {
  Eigen::MatrixXd transform;  // d x p
  double lambda = kDefaultRidgeLambda;
  Eigen::VectorXd mu;     // p
  Eigen::VectorXd sigma;  // p, strictly positive
  // Columns whose fitted sigma was zero; their sigma is stored as 1.
  std::vector<std::uint8_t> frozen;
  std::vector<std::string> descriptor_names;

  Eigen::Index input_dim() const { return transform.rows(); }
  Eigen::Index output_dim() const { return transform.cols(); }
};

struct RepresentationMatrix {
  Eigen::MatrixXd values;  // n x p
  bool normalized = false;
  std::vector<std::string> names;
};

// Solves the ridge normal equations with a Cholesky factorization. With
// lambda = 0 a numerically singular E^T E is a kSingularity error.
ProjectionModel FitProjection(const Eigen::MatrixXd& embeddings,
                              const FeatureMatrix& features, double lambda);

// Raw representation R = E T.
RepresentationMatrix Project(const Eigen::MatrixXd& embeddings,
                             const ProjectionModel& model);

// Normalized representation R'. Frozen columns are only centered.
RepresentationMatrix Transform(const Eigen::MatrixXd& embeddings,
                               const ProjectionModel& model);

struct ProjectionResult {
  ProjectionModel model;
  RepresentationMatrix train;
  RepresentationMatrix test;
};

// Fits on the training rows only; the test representation is normalized with
// the training statistics.
ProjectionResult FitTransformPipeline(const Eigen::MatrixXd& train_embeddings,
                                      const FeatureMatrix& train_features,
                                      const Eigen::MatrixXd& test_embeddings,
                                      double lambda);

// Binary model file: "NIPM" | lambda f64 | d u64 | p u64 | T (row-major f64)
// | mu | sigma | frozen u8 x p | names (u32 length + UTF-8 bytes) x p.
std::vector<std::uint8_t> EncodeProjectionModel(const ProjectionModel& model);
ProjectionModel DecodeProjectionModel(std::span<const std::uint8_t> bytes);
void SaveProjectionModel(const std::filesystem::path& path,
                         const ProjectionModel& model);
ProjectionModel LoadProjectionModel(const std::filesystem::path& path);

}  // namespace nisleep

#endif  // NISLEEP_PROJECT_H_
