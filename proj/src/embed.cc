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

#include "nisleep/embed.h"

#include <cmath>
#include <random>

#include "json.hpp"
#include "nisleep/binary_io.h"
#include "nisleep/error.h"

namespace nisleep {

namespace {

constexpr char kMagic[] = "NISE";
constexpr std::uint16_t kVersion = 1;

std::filesystem::path SidecarPath(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  p += ".json";
  return p;
}

std::string_view SourceName(EmbeddingSource s) {
  return s == EmbeddingSource::kSynthetic ? "synthetic" : "external_file";
}

Eigen::MatrixXd Gaussian(Eigen::Index rows, Eigen::Index cols,
                         std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  // Fill row-major so the stream order does not depend on storage order.
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

}  // namespace

Eigen::MatrixXd EmbeddingMatrix::SubjectRows(const std::string& subject_id) const {
  Eigen::Index offset = 0;
  for (std::size_t s = 0; s < subject_ids.size(); ++s) {
    const auto count = static_cast<Eigen::Index>(epoch_counts.at(s));
    if (subject_ids[s] == subject_id) return values.middleRows(offset, count);
    offset += count;
  }
  Fail(ErrorCode::kProvenance,
       "embedding store has no rows for subject '" + subject_id + "'");
}

void SaveEmbeddings(const std::filesystem::path& path, const EmbeddingMatrix& e) {
  ByteWriter w;
  w.Magic(kMagic);
  w.U16(kVersion);
  w.U64(static_cast<std::uint64_t>(e.rows()));
  w.U64(static_cast<std::uint64_t>(e.dim()));
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    for (Eigen::Index j = 0; j < e.dim(); ++j) {
      w.F32(static_cast<float>(e.values(i, j)));
    }
  }
  nlohmann::json side;
  side["source"] = SourceName(e.source);
  side["subject_ids"] = e.subject_ids;
  side["epoch_counts"] = e.epoch_counts;
  WriteFileAtomic(path, w.bytes());
  WriteFileAtomic(SidecarPath(path), side.dump(2) + "\n");
}

EmbeddingMatrix LoadEmbeddings(const std::filesystem::path& path,
                               std::optional<std::size_t> expected_rows) {
  const auto bytes = ReadFileBytes(path);
  ByteReader r(bytes, "embedding store");
  r.ExpectMagic(kMagic);
  const std::uint16_t version = r.U16();
  if (version != kVersion) {
    Fail(ErrorCode::kStructural,
         "unsupported embedding store version " + std::to_string(version));
  }
  const std::uint64_t n = r.U64();
  const std::uint64_t d = r.U64();
  if (d == 0) Fail(ErrorCode::kStructural, "embedding dimension is zero");
  if (r.remaining() != n * d * sizeof(float)) {
    Fail(ErrorCode::kStructural,
         "embedding payload holds " + std::to_string(r.remaining()) +
             " bytes, header declares " + std::to_string(n) + " x " +
             std::to_string(d) + " floats");
  }
  if (expected_rows.has_value() && *expected_rows != n) {
    Fail(ErrorCode::kProvenance,
         "embedding store has " + std::to_string(n) + " rows but the epoch store has " +
             std::to_string(*expected_rows) + " epochs");
  }
  EmbeddingMatrix e;
  e.source = EmbeddingSource::kExternalFile;
  e.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t j = 0; j < d; ++j) {
      const float v = r.F32();
      if (!std::isfinite(v)) {
        Fail(ErrorCode::kData, "non-finite embedding value at row " +
                                   std::to_string(i) + ", column " + std::to_string(j));
      }
      e.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  const auto sidecar = SidecarPath(path);
  if (std::filesystem::exists(sidecar)) {
    try {
      const auto bytes_side = ReadFileBytes(sidecar);
      const auto side = nlohmann::json::parse(bytes_side.begin(), bytes_side.end());
      if (side.value("source", "") == "synthetic") e.source = EmbeddingSource::kSynthetic;
      e.subject_ids = side.at("subject_ids").get<std::vector<std::string>>();
      e.epoch_counts = side.at("epoch_counts").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& ex) {
      Fail(ErrorCode::kParse, std::string("embedding sidecar: ") + ex.what());
    }
    std::size_t total = 0;
    for (std::size_t c : e.epoch_counts) total += c;
    if (e.subject_ids.size() != e.epoch_counts.size() || total != n) {
      Fail(ErrorCode::kProvenance, "embedding sidecar row counts do not add up to " +
                                       std::to_string(n));
    }
  }
  return e;
}

Eigen::MatrixXd Standardize(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z(x.rows(), x.cols());
  const auto n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mu = x.col(j).sum() / n;
    const double var = (x.col(j).array() - mu).square().sum() / n;
    const double sd = std::sqrt(var);
    if (sd <= 1e-12 * std::max(1.0, std::abs(mu))) {
      z.col(j).setZero();
    } else {
      z.col(j) = (x.col(j).array() - mu) / sd;
    }
  }
  return z;
}

EmbeddingMatrix SynthEmbeddings(const FeatureMatrix& fm, std::size_t d,
                                double noise_sigma, std::uint64_t seed) {
  const auto p = static_cast<std::size_t>(fm.cols());
  if (d < p) {
    Fail(ErrorCode::kDimension, "embedding dimension " + std::to_string(d) +
                                    " is smaller than the " + std::to_string(p) +
                                    " feature columns");
  }
  if (!(noise_sigma >= 0.0)) Fail(ErrorCode::kData, "noise sigma must be >= 0");
  const auto dd = static_cast<Eigen::Index>(d);
  const auto pp = static_cast<Eigen::Index>(p);

  // One extra orthonormal direction carries a constant offset, so an
  // intercept-free linear map from E back to the unstandardized features
  // exists on any subset of rows.
  const bool with_offset = d > p;
  const Eigen::Index basis_cols = pp + (with_offset ? 1 : 0);
  std::seed_seq basis_seed{seed, std::uint64_t{0x6a09e667}};
  std::mt19937_64 basis_rng(basis_seed);
  const Eigen::MatrixXd a = Gaussian(dd, basis_cols, basis_rng);
  const Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() *
      Eigen::MatrixXd::Identity(dd, basis_cols);
  const Eigen::MatrixXd g = q.leftCols(pp).transpose();  // p x d, orthonormal rows

  EmbeddingMatrix e;
  e.source = EmbeddingSource::kSynthetic;
  e.values = Standardize(fm.values) * g;
  if (with_offset) {
    e.values.rowwise() += q.col(pp).transpose();
  }
  if (noise_sigma > 0.0) {
    std::seed_seq noise_seed{seed, std::uint64_t{0xbb67ae85}};
    std::mt19937_64 noise_rng(noise_seed);
    e.values += noise_sigma * Gaussian(fm.rows(), dd, noise_rng);
  }
  return e;
}

}  // namespace nisleep
