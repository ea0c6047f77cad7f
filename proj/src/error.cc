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

#include "nisleep/error.h"

#include <string>

namespace nisleep {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage: return "usage";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kStructural: return "structural";
    case ErrorCode::kLabeling: return "labeling";
    case ErrorCode::kAlignment: return "alignment";
    case ErrorCode::kSplit: return "split";
    case ErrorCode::kSpectral: return "spectral";
    case ErrorCode::kBand: return "band";
    case ErrorCode::kCatalog: return "catalog";
    case ErrorCode::kSelection: return "selection";
    case ErrorCode::kProvenance: return "provenance";
    case ErrorCode::kData: return "data";
    case ErrorCode::kDimension: return "dimension";
    case ErrorCode::kTraining: return "training";
    case ErrorCode::kEvaluation: return "evaluation";
    case ErrorCode::kAttribution: return "attribution";
    case ErrorCode::kSize: return "size";
    case ErrorCode::kReport: return "report";
    case ErrorCode::kSingularity: return "singularity";
    case ErrorCode::kDivergence: return "divergence";
  }
  return "unknown";
}

namespace {

std::string Decorate(ErrorCode code, const std::string& message,
                     std::optional<std::size_t> byte_offset) {
  std::string out(ErrorCodeName(code));
  out += " error: ";
  out += message;
  if (byte_offset.has_value()) {
    out += " (at byte offset " + std::to_string(*byte_offset) + ")";
  }
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> byte_offset)
    : std::runtime_error(Decorate(code, message, byte_offset)),
      code_(code),
      byte_offset_(byte_offset) {}

int Error::exit_code() const {
  switch (code_) {
    case ErrorCode::kUsage:
      return 1;
    case ErrorCode::kSingularity:
    case ErrorCode::kDivergence:
      return 3;
    default:
      return 2;
  }
}

void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace nisleep
