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

#include "nisleep/project.h"

#include <cmath>
#include <limits>

#include "nisleep/binary_io.h"
#include "nisleep/error.h"

namespace nisleep {

namespace {

constexpr char kMagic[] = "NIPM";

void CheckFinite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    Fail(ErrorCode::kData, std::string(what) + " contains non-finite values");
  }
}

}  // namespace

ProjectionModel FitProjection(const Eigen::MatrixXd& embeddings,
                              const FeatureMatrix& features, double lambda) {
  const Eigen::MatrixXd& e = embeddings;
  const Eigen::MatrixXd& f = features.values;
  if (e.rows() != f.rows()) {
    Fail(ErrorCode::kDimension, "embedding rows (" + std::to_string(e.rows()) +
                                    ") and feature rows (" +
                                    std::to_string(f.rows()) + ") differ");
  }
  if (e.rows() < 2) Fail(ErrorCode::kDimension, "need at least 2 rows to fit");
  if (e.cols() == 0 || f.cols() == 0) {
    Fail(ErrorCode::kDimension, "empty embedding or feature matrix");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    Fail(ErrorCode::kData, "ridge lambda must be a finite value >= 0");
  }
  CheckFinite(e, "embedding matrix");
  CheckFinite(f, "feature matrix");

  const Eigen::Index d = e.cols();
  Eigen::MatrixXd gram = e.transpose() * e;
  gram.diagonal().array() += lambda;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);

  const Eigen::VectorXd pivots = Eigen::MatrixXd(llt.matrixL()).diagonal();
  const double max_pivot = pivots.cwiseAbs().maxCoeff();
  const double min_pivot = pivots.cwiseAbs().minCoeff();
  const double eps = std::numeric_limits<double>::epsilon();
  // Squared pivots bound the spectrum of the Gram matrix.
  const bool singular =
      llt.info() != Eigen::Success || !(min_pivot > 0.0) ||
      min_pivot * min_pivot <= static_cast<double>(d) * eps * max_pivot * max_pivot;
  if (singular) {
    Fail(ErrorCode::kSingularity,
         "E^T E + lambda I is numerically singular at lambda = " +
             std::to_string(lambda) + "; use a positive ridge lambda");
  }

  ProjectionModel model;
  model.lambda = lambda;
  model.transform = llt.solve(e.transpose() * f);
  if (!model.transform.allFinite()) {
    Fail(ErrorCode::kSingularity, "ridge solution is not finite");
  }
  model.descriptor_names = features.names();

  const Eigen::MatrixXd r = e * model.transform;
  const auto n = static_cast<double>(r.rows());
  model.mu = r.colwise().sum().transpose() / n;
  model.sigma.resize(r.cols());
  model.frozen.assign(static_cast<std::size_t>(r.cols()), 0);
  for (Eigen::Index j = 0; j < r.cols(); ++j) {
    const double var = (r.col(j).array() - model.mu(j)).square().sum() / n;
    const double sd = std::sqrt(var);
    if (sd == 0.0 || sd <= 1e-12 * std::abs(model.mu(j))) {
      model.sigma(j) = 1.0;
      model.frozen[static_cast<std::size_t>(j)] = 1;
    } else {
      model.sigma(j) = sd;
    }
  }
  return model;
}

RepresentationMatrix Project(const Eigen::MatrixXd& embeddings,
                             const ProjectionModel& model) {
  if (embeddings.cols() != model.input_dim()) {
    Fail(ErrorCode::kDimension,
         "embedding width " + std::to_string(embeddings.cols()) +
             " does not match projection input " + std::to_string(model.input_dim()));
  }
  RepresentationMatrix r;
  r.values = embeddings * model.transform;
  r.normalized = false;
  r.names = model.descriptor_names;
  return r;
}

RepresentationMatrix Transform(const Eigen::MatrixXd& embeddings,
                               const ProjectionModel& model) {
  RepresentationMatrix r = Project(embeddings, model);
  r.values.rowwise() -= model.mu.transpose();
  r.values.array().rowwise() /= model.sigma.transpose().array();
  r.normalized = true;
  return r;
}

ProjectionResult FitTransformPipeline(const Eigen::MatrixXd& train_embeddings,
                                      const FeatureMatrix& train_features,
                                      const Eigen::MatrixXd& test_embeddings,
                                      double lambda) {
  ProjectionResult out;
  out.model = FitProjection(train_embeddings, train_features, lambda);
  out.train = Transform(train_embeddings, out.model);
  out.test = Transform(test_embeddings, out.model);
  return out;
}

std::vector<std::uint8_t> EncodeProjectionModel(const ProjectionModel& model) {
  const Eigen::Index d = model.input_dim();
  const Eigen::Index p = model.output_dim();
  ByteWriter w;
  w.Magic(kMagic);
  w.F64(model.lambda);
  w.U64(static_cast<std::uint64_t>(d));
  w.U64(static_cast<std::uint64_t>(p));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) w.F64(model.transform(i, j));
  }
  for (Eigen::Index j = 0; j < p; ++j) w.F64(model.mu(j));
  for (Eigen::Index j = 0; j < p; ++j) w.F64(model.sigma(j));
  for (Eigen::Index j = 0; j < p; ++j) w.U8(model.frozen[static_cast<std::size_t>(j)]);
  for (const auto& name : model.descriptor_names) w.String(name);
  return w.Release();
}

ProjectionModel DecodeProjectionModel(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "projection model");
  r.ExpectMagic(kMagic);
  ProjectionModel m;
  m.lambda = r.F64();
  const auto d = static_cast<Eigen::Index>(r.U64());
  const auto p = static_cast<Eigen::Index>(r.U64());
  if (static_cast<std::uint64_t>(d) * static_cast<std::uint64_t>(p) * 8 > r.remaining()) {
    Fail(ErrorCode::kStructural, "projection model truncated");
  }
  m.transform.resize(d, p);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) m.transform(i, j) = r.F64();
  }
  m.mu.resize(p);
  m.sigma.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) m.mu(j) = r.F64();
  for (Eigen::Index j = 0; j < p; ++j) m.sigma(j) = r.F64();
  m.frozen.resize(static_cast<std::size_t>(p));
  for (auto& f : m.frozen) f = r.U8();
  for (Eigen::Index j = 0; j < p; ++j) m.descriptor_names.push_back(r.String());
  if (r.remaining() != 0) {
    Fail(ErrorCode::kStructural, "trailing bytes after projection model");
  }
  if (!m.transform.allFinite() || !(m.sigma.array() > 0.0).all()) {
    Fail(ErrorCode::kData, "projection model has invalid parameters");
  }
  return m;
}

void SaveProjectionModel(const std::filesystem::path& path,
                         const ProjectionModel& model) {
  WriteFileAtomic(path, EncodeProjectionModel(model));
}

ProjectionModel LoadProjectionModel(const std::filesystem::path& path) {
  return DecodeProjectionModel(ReadFileBytes(path));
}

}  // namespace nisleep
