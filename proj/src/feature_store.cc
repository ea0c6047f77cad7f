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

#include "nisleep/feature_store.h"

#include <numeric>

#include "json.hpp"
#include "nisleep/binary_io.h"
#include "nisleep/error.h"

namespace nisleep {

namespace {

constexpr char kMagic[] = "NISF";
constexpr std::uint16_t kVersion = 1;

}  // namespace

std::vector<std::uint8_t> EncodeFeatureTable(const FeatureTable& table) {
  const FeatureMatrix& fm = table.matrix;
  const std::size_t total =
      std::accumulate(table.epoch_counts.begin(), table.epoch_counts.end(), std::size_t{0});
  if (table.subject_ids.size() != table.epoch_counts.size() ||
      total != static_cast<std::size_t>(fm.rows())) {
    Fail(ErrorCode::kProvenance, "feature table row provenance does not cover its rows");
  }
  nlohmann::ordered_json header;
  header["features"] = fm.names();
  header["subject_ids"] = table.subject_ids;
  header["epoch_counts"] = table.epoch_counts;
  if (fm.labels) {
    auto& labels = header["labels"] = nlohmann::ordered_json::array();
    for (SleepStage s : *fm.labels) labels.push_back(std::string(StageName(s)));
  } else {
    header["labels"] = nullptr;
  }
  ByteWriter w;
  w.Magic(kMagic);
  w.U16(kVersion);
  w.String(header.dump());
  for (Eigen::Index i = 0; i < fm.rows(); ++i) {
    for (Eigen::Index j = 0; j < fm.cols(); ++j) w.F64(fm.values(i, j));
  }
  return w.Release();
}

FeatureTable DecodeFeatureTable(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "feature table");
  r.ExpectMagic(kMagic);
  if (const std::uint16_t v = r.U16(); v != kVersion) {
    Fail(ErrorCode::kStructural, "unsupported feature table version " + std::to_string(v));
  }
  FeatureTable t;
  std::vector<std::string> names;
  try {
    const auto header = nlohmann::json::parse(r.String());
    names = header.at("features").get<std::vector<std::string>>();
    t.subject_ids = header.at("subject_ids").get<std::vector<std::string>>();
    t.epoch_counts = header.at("epoch_counts").get<std::vector<std::size_t>>();
    if (!header.at("labels").is_null()) {
      std::vector<SleepStage> labels;
      for (const auto& l : header.at("labels")) {
        labels.push_back(StageFromName(l.get<std::string>()));
      }
      t.matrix.labels = std::move(labels);
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("feature table header: ") + e.what());
  }
  for (const auto& n : names) t.matrix.descriptors.push_back(ParseFeatureName(n));
  const std::size_t n =
      std::accumulate(t.epoch_counts.begin(), t.epoch_counts.end(), std::size_t{0});
  const std::size_t p = names.size();
  if (t.subject_ids.size() != t.epoch_counts.size() ||
      (t.matrix.labels && t.matrix.labels->size() != n)) {
    Fail(ErrorCode::kStructural, "feature table header is inconsistent");
  }
  if (p != 0 && n > r.remaining() / 8 / p) {
    Fail(ErrorCode::kStructural, "feature table truncated");
  }
  t.matrix.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < t.matrix.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < t.matrix.values.cols(); ++j) t.matrix.values(i, j) = r.F64();
  }
  if (r.remaining() != 0) Fail(ErrorCode::kStructural, "trailing bytes after feature table");
  return t;
}

void SaveFeatureTable(const std::filesystem::path& path, const FeatureTable& table) {
  WriteFileAtomic(path, EncodeFeatureTable(table));
}

FeatureTable LoadFeatureTable(const std::filesystem::path& path) {
  return DecodeFeatureTable(ReadFileBytes(path));
}

std::string CatalogManifestJson(std::span<const FeatureDescriptor> descriptors) {
  auto out = nlohmann::ordered_json::array();
  for (const FeatureDescriptor& d : descriptors) {
    nlohmann::ordered_json j;
    j["name"] = d.name;
    j["channel"] = d.channel;
    j["kind"] = std::string(FeatureKindName(d.kind));
    j["measure"] = d.measure;
    j["band"] = d.band ? nlohmann::ordered_json(d.band->name) : nlohmann::ordered_json(nullptr);
    if (d.band) j["band_hz"] = {d.band->lo_hz, d.band->hi_hz};
    j["denominator"] = d.denominator ? nlohmann::ordered_json(d.denominator->name)
                                     : nlohmann::ordered_json(nullptr);
    j["window"] = d.window.empty() ? "full" : d.window;
    out.push_back(std::move(j));
  }
  return out.dump(2) + "\n";
}

}  // namespace nisleep
