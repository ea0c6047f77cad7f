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

#include "nisleep/stage.h"

#include <algorithm>
#include <cctype>
#include <string>

#include "nisleep/error.h"

namespace nisleep {

namespace {

std::string Normalize(std::string_view raw) {
  std::size_t b = 0;
  std::size_t e = raw.size();
  while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
  std::string out;
  out.reserve(e - b);
  for (std::size_t i = b; i < e; ++i) {
    out.push_back(
        static_cast<char>(std::toupper(static_cast<unsigned char>(raw[i]))));
  }
  return out;
}

// Result of looking up one token: a stage, an exclusion, or unknown.
struct Lookup {
  bool known = false;
  StageLabel label;
};

Lookup LookupAasm(const std::string& t) {
  if (t == "W" || t == "WAKE" || t == "SLEEP STAGE W") return {true, SleepStage::kW};
  if (t == "N1" || t == "SLEEP STAGE N1") return {true, SleepStage::kN1};
  if (t == "N2" || t == "SLEEP STAGE N2") return {true, SleepStage::kN2};
  if (t == "N3" || t == "SLEEP STAGE N3") return {true, SleepStage::kN3};
  if (t == "R" || t == "REM" || t == "SLEEP STAGE R") return {true, SleepStage::kREM};
  if (t == "MOVEMENT" || t == "UNKNOWN" || t == "?") return {true, std::nullopt};
  return {};
}

Lookup LookupRk(const std::string& t) {
  std::string s = t;
  constexpr std::string_view kPrefix = "SLEEP STAGE ";
  if (s.rfind(kPrefix, 0) == 0) s = s.substr(kPrefix.size());
  if (s == "W" || s == "WAKE") return {true, SleepStage::kW};
  if (s == "1" || s == "S1") return {true, SleepStage::kN1};
  if (s == "2" || s == "S2") return {true, SleepStage::kN2};
  if (s == "3" || s == "S3" || s == "4" || s == "S4") return {true, SleepStage::kN3};
  if (s == "R" || s == "REM") return {true, SleepStage::kREM};
  if (s == "?" || s == "M" || s == "MOVEMENT" || s == "MOVEMENT TIME" ||
      s == "UNKNOWN") {
    return {true, std::nullopt};
  }
  return {};
}

}  // namespace

SleepStage StageFromIndex(std::size_t index) {
  if (index >= kNumStages) {
    Fail(ErrorCode::kLabeling, "stage index out of range: " + std::to_string(index));
  }
  return static_cast<SleepStage>(index);
}

std::string_view StageName(SleepStage s) {
  switch (s) {
    case SleepStage::kW: return "W";
    case SleepStage::kN1: return "N1";
    case SleepStage::kN2: return "N2";
    case SleepStage::kN3: return "N3";
    case SleepStage::kREM: return "REM";
  }
  return "?";
}

SleepStage StageFromName(std::string_view name) {
  for (SleepStage s : kAllStages) {
    if (StageName(s) == name) return s;
  }
  Fail(ErrorCode::kLabeling, "unknown stage name '" + std::string(name) + "'");
}

AnnotationSchema SchemaFromName(std::string_view name) {
  const std::string n = Normalize(name);
  if (n == "AASM") return AnnotationSchema::kAasm;
  if (n == "RK" || n == "R&K") return AnnotationSchema::kRk;
  Fail(ErrorCode::kUsage, "unknown annotation schema '" + std::string(name) + "'");
}

std::vector<StageLabel> AlignStages(const std::vector<std::string>& raw_labels,
                                    AnnotationSchema schema) {
  std::vector<StageLabel> out;
  out.reserve(raw_labels.size());
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    const std::string token = Normalize(raw_labels[i]);
    const Lookup hit = schema == AnnotationSchema::kAasm ? LookupAasm(token)
                                                         : LookupRk(token);
    if (!hit.known) {
      Fail(ErrorCode::kLabeling, "unrecognized label '" + raw_labels[i] +
                                     "' at index " + std::to_string(i));
    }
    out.push_back(hit.label);
  }
  return out;
}

}  // namespace nisleep
