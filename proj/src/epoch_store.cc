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

#include "nisleep/epoch_store.h"

#include <algorithm>
#include <string>

#include "json.hpp"
#include "nisleep/binary_io.h"
#include "nisleep/error.h"

namespace nisleep {

namespace {

constexpr char kMagic[] = "NISP";
constexpr std::uint16_t kVersion = 1;

}  // namespace

std::vector<std::uint8_t> EncodeEpochedRecord(const EpochedRecord& record) {
  nlohmann::json header;
  header["subject_id"] = record.subject_id;
  header["epoch_len_s"] = record.epoch_len_s;
  header["n_epochs"] = record.epochs.size();
  auto& channels = header["channels"] = nlohmann::json::array();
  for (const auto& c : record.channels) {
    channels.push_back({{"name", c.name},
                        {"sampling_hz", c.sampling_hz},
                        {"samples_per_epoch", c.samples_per_epoch}});
  }
  auto& labels = header["labels"] = nlohmann::json::array();
  auto& sources = header["source_indices"] = nlohmann::json::array();
  for (const auto& e : record.epochs) {
    if (e.label.has_value()) {
      labels.push_back(std::string(StageName(*e.label)));
    } else {
      labels.push_back(nullptr);
    }
    sources.push_back(e.source_index);
  }

  ByteWriter w;
  w.Magic(kMagic);
  w.U16(kVersion);
  w.String(header.dump());
  for (std::size_t c = 0; c < record.channels.size(); ++c) {
    for (const auto& e : record.epochs) {
      if (e.windows.size() != record.channels.size() ||
          e.windows[c].size() != record.channels[c].samples_per_epoch) {
        Fail(ErrorCode::kStructural, "epoch window shape disagrees with channel '" +
                                         record.channels[c].name + "'");
      }
      for (float v : e.windows[c]) w.F32(v);
    }
  }
  return w.Release();
}

EpochedRecord DecodeEpochedRecord(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "epoch store");
  r.ExpectMagic(kMagic);
  const std::uint16_t version = r.U16();
  if (version != kVersion) {
    Fail(ErrorCode::kStructural,
         "unsupported epoch store version " + std::to_string(version));
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(r.String());
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("epoch store header: ") + e.what());
  }

  EpochedRecord rec;
  try {
    rec.subject_id = header.at("subject_id").get<std::string>();
    rec.epoch_len_s = header.at("epoch_len_s").get<double>();
    const auto n_epochs = header.at("n_epochs").get<std::size_t>();
    for (const auto& c : header.at("channels")) {
      rec.channels.push_back({c.at("name").get<std::string>(),
                              c.at("sampling_hz").get<double>(),
                              c.at("samples_per_epoch").get<std::size_t>()});
    }
    const auto& labels = header.at("labels");
    const auto& sources = header.at("source_indices");
    if (labels.size() != n_epochs || sources.size() != n_epochs) {
      Fail(ErrorCode::kStructural, "epoch store label count mismatch");
    }
    rec.epochs.resize(n_epochs);
    for (std::size_t i = 0; i < n_epochs; ++i) {
      if (!labels[i].is_null()) {
        rec.epochs[i].label = StageFromName(labels[i].get<std::string>());
      }
      rec.epochs[i].source_index = sources[i].get<std::size_t>();
      rec.epochs[i].windows.resize(rec.channels.size());
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("epoch store header: ") + e.what());
  }
  for (std::size_t c = 0; c < rec.channels.size(); ++c) {
    const std::size_t len = rec.channels[c].samples_per_epoch;
    for (auto& e : rec.epochs) {
      e.windows[c].resize(len);
      for (std::size_t k = 0; k < len; ++k) e.windows[c][k] = r.F32();
    }
  }
  if (r.remaining() != 0) {
    Fail(ErrorCode::kStructural, "trailing bytes after epoch store payload");
  }
  return rec;
}

void SaveEpochedRecord(const std::filesystem::path& path,
                       const EpochedRecord& record) {
  WriteFileAtomic(path, EncodeEpochedRecord(record));
}

EpochedRecord LoadEpochedRecord(const std::filesystem::path& path) {
  return DecodeEpochedRecord(ReadFileBytes(path));
}

std::vector<EpochedRecord> LoadEpochStore(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    Fail(ErrorCode::kIo, "epoch store directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() &&
        entry.path().extension() == kEpochStoreExtension) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<EpochedRecord> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(LoadEpochedRecord(f));
  return out;
}

}  // namespace nisleep
