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

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <utility>

#include "nisleep/error.h"
#include "nisleep/psg.h"

namespace nisleep {

void ValidateRecord(const PsgRecord& record) {
  std::set<std::string> names;
  for (const Channel& ch : record.channels) {
    if (!names.insert(ch.name).second) {
      Fail(ErrorCode::kStructural, "duplicate channel name '" + ch.name + "'");
    }
    if (!(ch.sampling_hz > 0)) {
      Fail(ErrorCode::kStructural,
           "channel '" + ch.name + "' has a non-positive sampling rate");
    }
    const auto expected =
        static_cast<std::size_t>(std::llround(record.duration_s * ch.sampling_hz));
    if (ch.samples.size() != expected) {
      Fail(ErrorCode::kStructural,
           "channel '" + ch.name + "' has " + std::to_string(ch.samples.size()) +
               " samples, expected " + std::to_string(expected));
    }
  }
}

std::vector<std::string> ParseLabelFile(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string>> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      Fail(ErrorCode::kLabeling,
           "line " + std::to_string(line_no) + ": expected epoch_index<TAB>label");
    }
    std::size_t index = 0;
    const auto [ptr, ec] =
        std::from_chars(line.data(), line.data() + tab, index);
    if (ec != std::errc() || ptr != line.data() + tab) {
      Fail(ErrorCode::kLabeling, "line " + std::to_string(line_no) +
                                     ": malformed epoch index '" +
                                     std::string(line.substr(0, tab)) + "'");
    }
    rows.emplace_back(index, std::string(line.substr(tab + 1)));
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != i) {
      Fail(ErrorCode::kLabeling,
           "epoch indices must cover 0..n-1 exactly once; saw " +
               std::to_string(rows[i].first) + " where " + std::to_string(i) +
               " was expected");
    }
    out.push_back(std::move(rows[i].second));
  }
  return out;
}

namespace {

std::size_t WindowLength(double epoch_len_s, double sampling_hz) {
  return static_cast<std::size_t>(std::llround(epoch_len_s * sampling_hz));
}

}  // namespace

std::size_t CompleteWindowCount(const PsgRecord& record, double epoch_len_s) {
  if (record.channels.empty()) return 0;
  std::size_t n = std::numeric_limits<std::size_t>::max();
  for (const Channel& ch : record.channels) {
    const std::size_t len = WindowLength(epoch_len_s, ch.sampling_hz);
    n = std::min(n, len == 0 ? 0 : ch.samples.size() / len);
  }
  return n;
}

EpochedRecord EpochRecord(const PsgRecord& record,
                          const std::optional<std::vector<StageLabel>>& labels,
                          double epoch_len_s) {
  if (!(epoch_len_s > 0)) {
    Fail(ErrorCode::kAlignment, "epoch length must be positive");
  }
  EpochedRecord out;
  out.subject_id = record.subject_id;
  out.epoch_len_s = epoch_len_s;
  for (const Channel& ch : record.channels) {
    const std::size_t len = WindowLength(epoch_len_s, ch.sampling_hz);
    if (len == 0) {
      Fail(ErrorCode::kAlignment,
           "channel '" + ch.name + "' yields empty epoch windows");
    }
    out.channels.push_back({ch.name, ch.sampling_hz, len});
  }
  const std::size_t available = CompleteWindowCount(record, epoch_len_s);
  std::size_t n = available;
  if (labels.has_value()) {
    if (labels->size() > available) {
      Fail(ErrorCode::kAlignment,
           std::to_string(labels->size()) + " labels but only " +
               std::to_string(available) + " complete " +
               std::to_string(epoch_len_s) + " s windows in '" +
               record.subject_id + "'");
    }
    n = labels->size();
  }
  for (std::size_t i = 0; i < n; ++i) {
    StageLabel label;
    if (labels.has_value()) {
      label = (*labels)[i];
      if (!label.has_value()) continue;
    }
    Epoch e;
    e.label = label;
    e.source_index = i;
    e.windows.reserve(record.channels.size());
    for (std::size_t c = 0; c < record.channels.size(); ++c) {
      const std::size_t len = out.channels[c].samples_per_epoch;
      const auto& s = record.channels[c].samples;
      e.windows.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(i * len),
                             s.begin() + static_cast<std::ptrdiff_t>((i + 1) * len));
    }
    out.epochs.push_back(std::move(e));
  }
  return out;
}

SubjectSplit SplitBySubject(std::span<const std::string> subject_ids,
                            double train_fraction, std::uint64_t seed) {
  const std::size_t n = subject_ids.size();
  if (n < 2) Fail(ErrorCode::kSplit, "need at least 2 subjects to split");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    Fail(ErrorCode::kSplit, "train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return subject_ids[a] < subject_ids[b];
  });
  for (std::size_t i = 1; i < n; ++i) {
    if (subject_ids[order[i]] == subject_ids[order[i - 1]]) {
      Fail(ErrorCode::kSplit,
           "duplicate subject id '" + subject_ids[order[i]] + "'");
    }
  }
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::size_t n_test = static_cast<std::size_t>(
      std::max(1.0, std::round((1.0 - train_fraction) * static_cast<double>(n))));
  n_test = std::min(n_test, n - 1);

  SubjectSplit split;
  split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

SubjectSplit SplitBySubject(std::span<const EpochedRecord> records,
                            double train_fraction, std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.subject_id);
  return SplitBySubject(ids, train_fraction, seed);
}

}  // namespace nisleep
