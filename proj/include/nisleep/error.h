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

#ifndef NISLEEP_ERROR_H_
#define NISLEEP_ERROR_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nisleep {

// Failure categories. Each maps onto one of the CLI exit codes
// (1 usage, 2 data, 3 numerical).
enum class ErrorCode {
  kUsage,
  kIo,
  kParse,
  kStructural,
  kLabeling,
  kAlignment,
  kSplit,
  kSpectral,
  kBand,
  kCatalog,
  kSelection,
  kProvenance,
  kData,
  kDimension,
  kTraining,
  kEvaluation,
  kAttribution,
  kSize,
  kReport,
  kSingularity,
  kDivergence,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> byte_offset = std::nullopt);

  ErrorCode code() const { return code_; }
  // Set for parse errors that can be pinned to a location in the input.
  std::optional<std::size_t> byte_offset() const { return byte_offset_; }
  int exit_code() const;

 private:
  ErrorCode code_;
  std::optional<std::size_t> byte_offset_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

}  // namespace nisleep

#endif  // NISLEEP_ERROR_H_
