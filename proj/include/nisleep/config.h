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

// Run configuration: a flat TOML-style document of `key = value` lines with
// optional [section] headers. Command-line overrides use the same keys, so
// the effective value is flag > file > default.

#ifndef NISLEEP_CONFIG_H_
#define NISLEEP_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nisleep {

struct RunConfig {
  std::string store;     // epoch store directory
  std::string dataset;   // defaults to the store directory name
  std::string variant;   // defaults to NormIntSleep-<catalog>-<classifier>
  std::uint64_t seed = 0;
  std::string catalog = "FeatShort";
  double train_fraction = 0.8;
  double select_fraction = 0.9;
  // "synthetic" or the path of an embedding store.
  std::string embeddings = "synthetic";
  std::int64_t embed_dim = 512;
  double embed_noise = 0.0;
  double lambda = 1.0;
  std::string classifier = "logistic";
  bool class_weighted = false;
  double logistic_l2 = 1e-4;
  std::int64_t logistic_max_iter = 500;
  double logistic_tol = 1e-6;
  std::int64_t tree_max_depth = 8;
  std::int64_t tree_min_leaf = 1;
  std::int64_t gbt_n_rounds = 200;
  double gbt_learning_rate = 0.1;
  std::int64_t gbt_max_depth = 4;
  std::int64_t gbt_min_leaf = 1;
  double welch_window_s = 5.0;
  double welch_overlap = 0.5;
  // Number of test rows explained; 0 explains all of them.
  std::int64_t explain_samples = 50;
  std::int64_t explain_permutations = 200;
  std::int64_t explain_top_k = 10;

  std::string EffectiveDataset() const;
  std::string EffectiveVariant() const;
};

// Throws kUsage naming the line for unknown keys or malformed values.
void ApplyConfigText(RunConfig& config, std::string_view text);
void ApplyConfigValue(RunConfig& config, std::string_view key, std::string_view value);

// Every key with its canonical textual value, in a fixed order.
std::vector<std::pair<std::string, std::string>> ConfigEntries(const RunConfig& config);
std::string ConfigToText(const RunConfig& config);

}  // namespace nisleep

#endif  // NISLEEP_CONFIG_H_
