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

// Polysomnography records: EDF ingestion, stage labels, 30 s epoching and
// subject-level train/test splitting.

#ifndef NISLEEP_PSG_H_
#define NISLEEP_PSG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nisleep/stage.h"

namespace nisleep {

struct Channel {
  std::string name;
  // Samples per second. EDF defines this as the rational
  // samples_per_record / record_duration; it is stored resolved.
  double sampling_hz = 0.0;
  // Physical (calibrated) values.
  std::vector<float> samples;
};

struct PsgRecord {
  std::string subject_id;
  std::vector<Channel> channels;
  double duration_s = 0.0;
};

// Throws kStructural if a channel's length disagrees with
// round(duration_s * sampling_hz) or channel names repeat.
void ValidateRecord(const PsgRecord& record);

// Decodes an EDF file. Signal samples are 16-bit little-endian two's
// complement, mapped to physical units through the header's digital and
// physical ranges. An "EDF Annotations" signal, if present, is skipped.
// The subject id is taken from the first token of the patient field.
PsgRecord ParseEdf(std::span<const std::uint8_t> bytes);
PsgRecord ReadEdfFile(const std::filesystem::path& path);

// Encodes `record` as EDF with data records of `record_duration_s` seconds.
// Each channel's digital range spans the full int16 range, its physical range
// the channel's min/max. Used to produce fixture files.
std::vector<std::uint8_t> WriteEdf(const PsgRecord& record,
                                   double record_duration_s = 1.0);

// Parses a label sidecar: one `epoch_index<TAB>label` line per epoch. Indices
// must cover 0..n-1 exactly once; the result is ordered by index.
std::vector<std::string> ParseLabelFile(std::string_view text);

struct EpochChannel {
  std::string name;
  double sampling_hz = 0.0;
  std::size_t samples_per_epoch = 0;
};

struct Epoch {
  // One window per channel, in EpochedRecord::channels order.
  std::vector<std::vector<float>> windows;
  StageLabel label;
  // Position of this epoch in the original recording.
  std::size_t source_index = 0;
};

struct EpochedRecord {
  std::string subject_id;
  double epoch_len_s = 30.0;
  std::vector<EpochChannel> channels;
  std::vector<Epoch> epochs;
};

// Cuts `record` into consecutive windows of epoch_len_s. With labels, window i
// carries labels[i] and excluded (nullopt) windows are dropped; trailing
// windows beyond the label list are dropped. Without labels every complete
// window is kept, unlabeled. Partial trailing windows are never padded.
EpochedRecord EpochRecord(const PsgRecord& record,
                          const std::optional<std::vector<StageLabel>>& labels,
                          double epoch_len_s = 30.0);

// Number of complete windows that fit in every channel.
std::size_t CompleteWindowCount(const PsgRecord& record, double epoch_len_s);

struct SubjectSplit {
  std::vector<std::size_t> train;  // indices into the input
  std::vector<std::size_t> test;
};

// Randomly partitions subjects: the test set holds
// max(1, round((1 - train_fraction) * n)) subjects, capped at n - 1.
// Deterministic for a fixed seed and independent of input order.
SubjectSplit SplitBySubject(std::span<const std::string> subject_ids,
                            double train_fraction, std::uint64_t seed);
SubjectSplit SplitBySubject(std::span<const EpochedRecord> records,
                            double train_fraction, std::uint64_t seed);

}  // namespace nisleep

#endif  // NISLEEP_PSG_H_
