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

// On-disk epoch store: one file per record.
//
//   "NISP" | u16 version | u32 header length | JSON header | channel blocks
//
// The JSON header lists subject_id, epoch_len_s, channels (name, sampling_hz,
// samples_per_epoch), labels (stage name or null) and source_indices. Each
// channel block is an n_epochs x samples_per_epoch little-endian float32
// matrix, row-major, in header channel order.

#ifndef NISLEEP_EPOCH_STORE_H_
#define NISLEEP_EPOCH_STORE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nisleep/psg.h"

namespace nisleep {

inline constexpr char kEpochStoreExtension[] = ".nisp";

std::vector<std::uint8_t> EncodeEpochedRecord(const EpochedRecord& record);
EpochedRecord DecodeEpochedRecord(std::span<const std::uint8_t> bytes);

void SaveEpochedRecord(const std::filesystem::path& path,
                       const EpochedRecord& record);
EpochedRecord LoadEpochedRecord(const std::filesystem::path& path);

// All records in a store directory, sorted by file name.
std::vector<EpochedRecord> LoadEpochStore(const std::filesystem::path& dir);

}  // namespace nisleep

#endif  // NISLEEP_EPOCH_STORE_H_
