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
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <string>

#include "nisleep/binary_io.h"
#include "nisleep/error.h"
#include "nisleep/psg.h"

namespace nisleep {

namespace {

constexpr std::size_t kFixedHeaderBytes = 256;
constexpr std::size_t kSignalHeaderBytes = 256;
constexpr char kAnnotationsLabel[] = "EDF Annotations";

// Field widths of the per-signal header block, in file order.
constexpr std::size_t kLabelWidth = 16;
constexpr std::size_t kTransducerWidth = 80;
constexpr std::size_t kPhysDimWidth = 8;
constexpr std::size_t kNumberWidth = 8;
constexpr std::size_t kPrefilterWidth = 80;
constexpr std::size_t kSignalReservedWidth = 32;

struct SignalHeader {
  std::string label;
  double physical_min = 0;
  double physical_max = 0;
  double digital_min = 0;
  double digital_max = 0;
  std::int64_t samples_per_record = 0;
};

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\0')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\0')) --e;
  return std::string(s.substr(b, e - b));
}

class HeaderCursor {
 public:
  explicit HeaderCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string Field(std::size_t offset, std::size_t width) const {
    if (offset + width > bytes_.size()) {
      throw Error(ErrorCode::kParse, "header field past end of input", offset);
    }
    return Trim(std::string_view(
        reinterpret_cast<const char*>(bytes_.data() + offset), width));
  }

  double Real(std::size_t offset, std::size_t width, const char* what) const {
    const std::string s = Field(offset, width);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() ||
        !std::isfinite(v)) {
      throw Error(ErrorCode::kParse,
                  std::string("malformed ") + what + " '" + s + "'", offset);
    }
    return v;
  }

  std::int64_t Integer(std::size_t offset, std::size_t width,
                       const char* what) const {
    const std::string s = Field(offset, width);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorCode::kParse,
                  std::string("malformed ") + what + " '" + s + "'", offset);
    }
    return v;
  }

 private:
  std::span<const std::uint8_t> bytes_;
};

std::string FirstToken(const std::string& s) {
  const auto sp = s.find(' ');
  return sp == std::string::npos ? s : s.substr(0, sp);
}

// Left-justified, space-padded ASCII field of exactly `width` bytes.
void PutField(std::vector<std::uint8_t>& out, std::string s,
              std::size_t width) {
  if (s.size() > width) s.resize(width);
  s.resize(width, ' ');
  out.insert(out.end(), s.begin(), s.end());
}

std::string FormatNumber(double v, std::size_t width) {
  char buf[64];
  for (int precision = 10; precision >= 0; --precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strlen(buf) <= width) return buf;
  }
  Fail(ErrorCode::kData, "value does not fit in an EDF header field");
}

// Largest (lower) or smallest (upper) 8-character header number that still
// encloses v.
double FormatBound(double v, bool lower) {
  double candidate = v;
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double printed = std::stod(FormatNumber(candidate, 8));
    if (lower ? printed <= v : printed >= v) return printed;
    const double step = std::max(std::abs(v), 1.0) * 1e-7 * (1 << std::min(attempt, 20));
    candidate = lower ? candidate - step : candidate + step;
  }
  Fail(ErrorCode::kData, "cannot represent physical bound in EDF header");
}

}  // namespace

PsgRecord ParseEdf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFixedHeaderBytes) {
    throw Error(ErrorCode::kParse,
                "input shorter than the 256-byte EDF header", bytes.size());
  }
  const HeaderCursor h(bytes);
  const std::string version = h.Field(0, 8);
  if (version != "0") {
    throw Error(ErrorCode::kParse, "unsupported EDF version '" + version + "'",
                0);
  }
  const std::string patient = h.Field(8, 80);
  const std::int64_t header_bytes = h.Integer(184, 8, "header byte count");
  const std::string reserved = h.Field(192, 44);
  if (reserved.rfind("EDF+D", 0) == 0) {
    Fail(ErrorCode::kStructural,
         "discontinuous EDF+ recordings are not supported");
  }
  const std::int64_t declared_records = h.Integer(236, 8, "data record count");
  const double record_duration = h.Real(244, 8, "data record duration");
  const std::int64_t ns = h.Integer(252, 4, "signal count");
  if (ns <= 0) throw Error(ErrorCode::kParse, "signal count must be positive", 252);
  if (record_duration <= 0) {
    throw Error(ErrorCode::kParse, "data record duration must be positive", 244);
  }
  const auto n_signals = static_cast<std::size_t>(ns);
  const std::size_t expected_header =
      kFixedHeaderBytes + kSignalHeaderBytes * n_signals;
  if (header_bytes != static_cast<std::int64_t>(expected_header)) {
    throw Error(ErrorCode::kParse,
                "header byte count " + std::to_string(header_bytes) +
                    " disagrees with " + std::to_string(ns) + " signals",
                184);
  }
  if (bytes.size() < expected_header) {
    throw Error(ErrorCode::kParse, "input ends inside the signal headers",
                bytes.size());
  }

  // Signal header fields are stored field-major: all labels, then all
  // transducers, and so on.
  std::vector<SignalHeader> signals(n_signals);
  std::size_t off = kFixedHeaderBytes;
  for (std::size_t i = 0; i < n_signals; ++i) {
    signals[i].label = h.Field(off + i * kLabelWidth, kLabelWidth);
  }
  off += n_signals * (kLabelWidth + kTransducerWidth + kPhysDimWidth);
  for (std::size_t i = 0; i < n_signals; ++i) {
    signals[i].physical_min =
        h.Real(off + i * kNumberWidth, kNumberWidth, "physical minimum");
  }
  off += n_signals * kNumberWidth;
  for (std::size_t i = 0; i < n_signals; ++i) {
    signals[i].physical_max =
        h.Real(off + i * kNumberWidth, kNumberWidth, "physical maximum");
  }
  off += n_signals * kNumberWidth;
  for (std::size_t i = 0; i < n_signals; ++i) {
    signals[i].digital_min =
        h.Real(off + i * kNumberWidth, kNumberWidth, "digital minimum");
  }
  off += n_signals * kNumberWidth;
  for (std::size_t i = 0; i < n_signals; ++i) {
    signals[i].digital_max =
        h.Real(off + i * kNumberWidth, kNumberWidth, "digital maximum");
    if (signals[i].digital_max <= signals[i].digital_min) {
      throw Error(ErrorCode::kParse,
                  "digital maximum must exceed digital minimum for '" +
                      signals[i].label + "'",
                  off + i * kNumberWidth);
    }
  }
  off += n_signals * (kNumberWidth + kPrefilterWidth);
  for (std::size_t i = 0; i < n_signals; ++i) {
    const std::size_t field_off = off + i * kNumberWidth;
    const double spr = h.Real(field_off, kNumberWidth, "samples per record");
    if (spr <= 0 || spr != std::floor(spr)) {
      throw Error(ErrorCode::kStructural,
                  "samples per record for '" + signals[i].label +
                      "' is not a positive integer",
                  field_off);
    }
    signals[i].samples_per_record = static_cast<std::int64_t>(spr);
  }
  off += n_signals * (kNumberWidth + kSignalReservedWidth);

  std::size_t record_bytes = 0;
  for (const auto& s : signals) {
    record_bytes += 2 * static_cast<std::size_t>(s.samples_per_record);
  }
  const std::size_t data_bytes = bytes.size() - expected_header;
  std::size_t n_records = 0;
  if (declared_records == -1) {
    if (data_bytes % record_bytes != 0) {
      Fail(ErrorCode::kStructural,
           "data section of " + std::to_string(data_bytes) +
               " bytes is not a whole number of " +
               std::to_string(record_bytes) + "-byte records");
    }
    n_records = data_bytes / record_bytes;
  } else if (declared_records < 0) {
    throw Error(ErrorCode::kParse, "negative data record count", 236);
  } else {
    n_records = static_cast<std::size_t>(declared_records);
    const std::size_t needed = n_records * record_bytes;
    if (data_bytes < needed) {
      Fail(ErrorCode::kStructural,
           "truncated: header declares " + std::to_string(n_records) +
               " records (" + std::to_string(needed) + " bytes) but only " +
               std::to_string(data_bytes) + " data bytes are present");
    }
    if (data_bytes != needed) {
      Fail(ErrorCode::kStructural,
           "inconsistent record sizes: " + std::to_string(data_bytes) +
               " data bytes for " + std::to_string(n_records) + " records of " +
               std::to_string(record_bytes) + " bytes");
    }
  }

  PsgRecord record;
  record.subject_id = FirstToken(patient);
  record.duration_s = static_cast<double>(n_records) * record_duration;

  std::vector<std::size_t> kept;  // signal index -> channel slot
  std::vector<std::ptrdiff_t> slot(n_signals, -1);
  for (std::size_t i = 0; i < n_signals; ++i) {
    if (signals[i].label == kAnnotationsLabel) continue;
    slot[i] = static_cast<std::ptrdiff_t>(record.channels.size());
    Channel ch;
    ch.name = signals[i].label;
    ch.sampling_hz =
        static_cast<double>(signals[i].samples_per_record) / record_duration;
    ch.samples.reserve(n_records *
                       static_cast<std::size_t>(signals[i].samples_per_record));
    record.channels.push_back(std::move(ch));
  }

  const std::uint8_t* p = bytes.data() + expected_header;
  for (std::size_t r = 0; r < n_records; ++r) {
    for (std::size_t i = 0; i < n_signals; ++i) {
      const auto spr = static_cast<std::size_t>(signals[i].samples_per_record);
      if (slot[i] < 0) {
        p += 2 * spr;
        continue;
      }
      const SignalHeader& s = signals[i];
      const double scale =
          (s.physical_max - s.physical_min) / (s.digital_max - s.digital_min);
      auto& out = record.channels[static_cast<std::size_t>(slot[i])].samples;
      for (std::size_t k = 0; k < spr; ++k, p += 2) {
        const auto digital = static_cast<std::int16_t>(
            static_cast<std::uint16_t>(p[0]) |
            (static_cast<std::uint16_t>(p[1]) << 8));
        out.push_back(static_cast<float>(
            (digital - s.digital_min) * scale + s.physical_min));
      }
    }
  }
  ValidateRecord(record);
  return record;
}

PsgRecord ReadEdfFile(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = ReadFileBytes(path);
  return ParseEdf(bytes);
}

std::vector<std::uint8_t> WriteEdf(const PsgRecord& record,
                                   double record_duration_s) {
  ValidateRecord(record);
  const std::size_t ns = record.channels.size();
  if (ns == 0) Fail(ErrorCode::kData, "record has no channels");
  std::vector<std::size_t> spr(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    const double v = record.channels[i].sampling_hz * record_duration_s;
    if (std::abs(v - std::round(v)) > 1e-9) {
      Fail(ErrorCode::kData, "channel '" + record.channels[i].name +
                                 "' has a non-integer sample count per record");
    }
    spr[i] = static_cast<std::size_t>(std::llround(v));
  }
  const double n_rec_real = record.duration_s / record_duration_s;
  const auto n_records = static_cast<std::size_t>(std::llround(n_rec_real));
  if (std::abs(n_rec_real - static_cast<double>(n_records)) > 1e-9) {
    Fail(ErrorCode::kData, "duration is not a whole number of data records");
  }

  std::vector<double> pmin(ns), pmax(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    const auto& s = record.channels[i].samples;
    double lo = s.empty() ? 0.0 : *std::min_element(s.begin(), s.end());
    double hi = s.empty() ? 0.0 : *std::max_element(s.begin(), s.end());
    if (hi <= lo) {
      lo -= 1.0;
      hi += 1.0;
    }
    pmin[i] = FormatBound(lo, /*lower=*/true);
    pmax[i] = FormatBound(hi, /*lower=*/false);
  }

  std::vector<std::uint8_t> out;
  out.reserve(256 * (ns + 1) + 2 * record.channels[0].samples.size() * ns);
  PutField(out, "0", 8);
  PutField(out, record.subject_id.empty() ? "X" : record.subject_id, 80);
  PutField(out, "Startdate X X X X", 80);
  PutField(out, "01.01.00", 8);
  PutField(out, "00.00.00", 8);
  PutField(out, std::to_string(256 * (ns + 1)), 8);
  PutField(out, "", 44);
  PutField(out, std::to_string(n_records), 8);
  PutField(out, FormatNumber(record_duration_s, 8), 8);
  PutField(out, std::to_string(ns), 4);
  for (const auto& c : record.channels) PutField(out, c.name, kLabelWidth);
  for (std::size_t i = 0; i < ns; ++i) PutField(out, "", kTransducerWidth);
  for (std::size_t i = 0; i < ns; ++i) PutField(out, "uV", kPhysDimWidth);
  for (std::size_t i = 0; i < ns; ++i) PutField(out, FormatNumber(pmin[i], 8), 8);
  for (std::size_t i = 0; i < ns; ++i) PutField(out, FormatNumber(pmax[i], 8), 8);
  for (std::size_t i = 0; i < ns; ++i) PutField(out, "-32768", 8);
  for (std::size_t i = 0; i < ns; ++i) PutField(out, "32767", 8);
  for (std::size_t i = 0; i < ns; ++i) PutField(out, "", kPrefilterWidth);
  for (std::size_t i = 0; i < ns; ++i) PutField(out, std::to_string(spr[i]), 8);
  for (std::size_t i = 0; i < ns; ++i) PutField(out, "", kSignalReservedWidth);

  constexpr double kDigMin = -32768.0;
  constexpr double kDigMax = 32767.0;
  for (std::size_t r = 0; r < n_records; ++r) {
    for (std::size_t i = 0; i < ns; ++i) {
      const auto& s = record.channels[i].samples;
      const double scale = (kDigMax - kDigMin) / (pmax[i] - pmin[i]);
      for (std::size_t k = 0; k < spr[i]; ++k) {
        const double phys = s[r * spr[i] + k];
        const double dig = std::clamp(
            std::round((phys - pmin[i]) * scale + kDigMin), kDigMin, kDigMax);
        const auto v = static_cast<std::uint16_t>(static_cast<std::int16_t>(dig));
        out.push_back(static_cast<std::uint8_t>(v & 0xff));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
      }
    }
  }
  return out;
}

}  // namespace nisleep
