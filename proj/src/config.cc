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

#include "nisleep/config.h"

#include <array>
#include <charconv>
#include <filesystem>
#include <functional>

#include "nisleep/error.h"

namespace nisleep {

namespace {

std::string_view Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string Unquote(std::string_view v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) ++i;
      out += v[i];
    }
    return out;
  }
  return std::string(v);
}

double ParseDouble(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    Fail(ErrorCode::kUsage, "config key '" + std::string(key) + "' expects a number, got '" +
                                std::string(v) + "'");
  }
  return out;
}

std::int64_t ParseInt(std::string_view key, std::string_view v) {
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    Fail(ErrorCode::kUsage, "config key '" + std::string(key) + "' expects an integer, got '" +
                                std::string(v) + "'");
  }
  return out;
}

bool ParseBool(std::string_view key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  Fail(ErrorCode::kUsage, "config key '" + std::string(key) + "' expects true or false");
}

std::string FormatDouble(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string Quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

struct Key {
  std::string_view name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define NISLEEP_STRING_KEY(key, field)                                          \
  Key{key, [](RunConfig& c, std::string_view v) { c.field = Unquote(v); },      \
      [](const RunConfig& c) { return Quote(c.field); }}
#define NISLEEP_DOUBLE_KEY(key, field)                                                 \
  Key{key, [](RunConfig& c, std::string_view v) { c.field = ParseDouble(key, v); },    \
      [](const RunConfig& c) { return FormatDouble(c.field); }}
#define NISLEEP_INT_KEY(key, field)                                                 \
  Key{key, [](RunConfig& c, std::string_view v) { c.field = ParseInt(key, v); },    \
      [](const RunConfig& c) { return std::to_string(c.field); }}

const std::vector<Key>& Keys() {
  static const std::vector<Key> keys = {
      NISLEEP_STRING_KEY("store", store),
      NISLEEP_STRING_KEY("dataset", dataset),
      NISLEEP_STRING_KEY("variant", variant),
      Key{"seed",
          [](RunConfig& c, std::string_view v) {
            const std::int64_t s = ParseInt("seed", v);
            if (s < 0) Fail(ErrorCode::kUsage, "seed must be non-negative");
            c.seed = static_cast<std::uint64_t>(s);
          },
          [](const RunConfig& c) { return std::to_string(c.seed); }},
      NISLEEP_STRING_KEY("catalog", catalog),
      NISLEEP_DOUBLE_KEY("train_fraction", train_fraction),
      NISLEEP_DOUBLE_KEY("select_fraction", select_fraction),
      NISLEEP_STRING_KEY("embeddings", embeddings),
      NISLEEP_INT_KEY("embed_dim", embed_dim),
      NISLEEP_DOUBLE_KEY("embed_noise", embed_noise),
      NISLEEP_DOUBLE_KEY("lambda", lambda),
      NISLEEP_STRING_KEY("classifier", classifier),
      Key{"class_weighted",
          [](RunConfig& c, std::string_view v) {
            c.class_weighted = ParseBool("class_weighted", v);
          },
          [](const RunConfig& c) { return std::string(c.class_weighted ? "true" : "false"); }},
      NISLEEP_DOUBLE_KEY("logistic.l2", logistic_l2),
      NISLEEP_INT_KEY("logistic.max_iter", logistic_max_iter),
      NISLEEP_DOUBLE_KEY("logistic.tol", logistic_tol),
      NISLEEP_INT_KEY("tree.max_depth", tree_max_depth),
      NISLEEP_INT_KEY("tree.min_leaf", tree_min_leaf),
      NISLEEP_INT_KEY("gbt.n_rounds", gbt_n_rounds),
      NISLEEP_DOUBLE_KEY("gbt.learning_rate", gbt_learning_rate),
      NISLEEP_INT_KEY("gbt.max_depth", gbt_max_depth),
      NISLEEP_INT_KEY("gbt.min_leaf", gbt_min_leaf),
      NISLEEP_DOUBLE_KEY("welch.window_s", welch_window_s),
      NISLEEP_DOUBLE_KEY("welch.overlap", welch_overlap),
      NISLEEP_INT_KEY("explain.samples", explain_samples),
      NISLEEP_INT_KEY("explain.permutations", explain_permutations),
      NISLEEP_INT_KEY("explain.top_k", explain_top_k),
  };
  return keys;
}

#undef NISLEEP_STRING_KEY
#undef NISLEEP_DOUBLE_KEY
#undef NISLEEP_INT_KEY

// Drops a trailing comment that is not inside a quoted string.
std::string_view StripComment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && quoted) {
      ++i;
    } else if (line[i] == '"') {
      quoted = !quoted;
    } else if (line[i] == '#' && !quoted) {
      return line.substr(0, i);
    }
  }
  return line;
}

}  // namespace

std::string RunConfig::EffectiveDataset() const {
  if (!dataset.empty()) return dataset;
  const std::filesystem::path p = std::filesystem::path(store).lexically_normal();
  const std::string name = (p.has_filename() ? p : p.parent_path()).filename().string();
  return name.empty() ? "dataset" : name;
}

std::string RunConfig::EffectiveVariant() const {
  return variant.empty() ? "NormIntSleep-" + catalog + "-" + classifier : variant;
}

void ApplyConfigValue(RunConfig& config, std::string_view key, std::string_view value) {
  for (const Key& k : Keys()) {
    if (k.name == key) {
      k.set(config, Trim(value));
      return;
    }
  }
  Fail(ErrorCode::kUsage, "unknown config key '" + std::string(key) + "'");
}

void ApplyConfigText(RunConfig& config, std::string_view text) {
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const std::string_view line = Trim(StripComment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        Fail(ErrorCode::kUsage, "config line " + std::to_string(line_no) + ": bad section header");
      }
      section = std::string(Trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      Fail(ErrorCode::kUsage, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key =
        (section.empty() ? "" : section + ".") + std::string(Trim(line.substr(0, eq)));
    try {
      ApplyConfigValue(config, key, line.substr(eq + 1));
    } catch (const Error& e) {
      Fail(ErrorCode::kUsage, "config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::vector<std::pair<std::string, std::string>> ConfigEntries(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Key& k : Keys()) out.emplace_back(std::string(k.name), k.get(config));
  return out;
}

std::string ConfigToText(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : ConfigEntries(config)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace nisleep
