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

#include "nisleep/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "nisleep/error.h"

namespace nisleep {

namespace {

std::string Fixed3(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << v;
  return os.str();
}

std::string Pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

EvalReport ReportFromConfusion(const ConfusionMatrix& confusion) {
  EvalReport r;
  r.confusion = confusion;
  std::array<double, kNumStages> row_sum{};
  std::array<double, kNumStages> col_sum{};
  double trace = 0.0;
  for (std::size_t t = 0; t < kNumStages; ++t) {
    for (std::size_t p = 0; p < kNumStages; ++p) {
      if (confusion[t][p] < 0) Fail(ErrorCode::kEvaluation, "negative confusion count");
      row_sum[t] += static_cast<double>(confusion[t][p]);
      col_sum[p] += static_cast<double>(confusion[t][p]);
      r.n += confusion[t][p];
    }
    trace += static_cast<double>(confusion[t][t]);
  }
  if (r.n <= 0) Fail(ErrorCode::kEvaluation, "confusion matrix is empty");
  const double n = static_cast<double>(r.n);
  r.accuracy = trace / n;

  double f1_sum = 0.0;
  double chance = 0.0;
  for (std::size_t k = 0; k < kNumStages; ++k) {
    const double tp = static_cast<double>(confusion[k][k]);
    ClassScores& c = r.per_class[k];
    c.support = static_cast<std::int64_t>(row_sum[k]);
    c.precision = col_sum[k] > 0 ? tp / col_sum[k] : 0.0;
    c.recall = row_sum[k] > 0 ? tp / row_sum[k] : 0.0;
    c.f1 = c.precision + c.recall > 0
               ? 2.0 * c.precision * c.recall / (c.precision + c.recall)
               : 0.0;
    f1_sum += c.f1;
    chance += (row_sum[k] / n) * (col_sum[k] / n);
  }
  r.macro_f1 = f1_sum / static_cast<double>(kNumStages);
  r.kappa = chance == 1.0 ? 0.0 : (r.accuracy - chance) / (1.0 - chance);
  return r;
}

EvalReport Evaluate(std::span<const SleepStage> y_true, std::span<const SleepStage> y_pred) {
  if (y_true.size() != y_pred.size()) {
    Fail(ErrorCode::kEvaluation, "label sequences differ in length (" +
                                     std::to_string(y_true.size()) + " vs " +
                                     std::to_string(y_pred.size()) + ")");
  }
  if (y_true.empty()) Fail(ErrorCode::kEvaluation, "no labels to evaluate");
  ConfusionMatrix cm{};
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ++cm[StageIndex(y_true[i])][StageIndex(y_pred[i])];
  }
  return ReportFromConfusion(cm);
}

double RoundDecimals(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

double AveragePerformance(std::span<const double> values) {
  if (values.empty()) Fail(ErrorCode::kEvaluation, "no scores to average");
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return RoundDecimals(mean, 3);
}

double AveragePerformance(std::span<const MetricTriple> per_dataset) {
  std::vector<double> values;
  for (const MetricTriple& t : per_dataset) {
    values.insert(values.end(), {t.accuracy, t.macro_f1, t.kappa});
  }
  return AveragePerformance(values);
}

std::string EvalReportToJson(const EvalReport& report, const std::string& dataset,
                             const std::string& model_id) {
  nlohmann::ordered_json j;
  j["dataset"] = dataset;
  j["model"] = model_id;
  j["n"] = report.n;
  j["accuracy"] = report.accuracy;
  j["macro_f1"] = report.macro_f1;
  j["kappa"] = report.kappa;
  auto& cm = j["confusion"] = nlohmann::ordered_json::array();
  for (const auto& row : report.confusion) cm.push_back(row);
  auto& per_class = j["per_class"] = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < kNumStages; ++k) {
    const ClassScores& c = report.per_class[k];
    per_class[std::string(StageName(StageFromIndex(k)))] = {
        {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}};
  }
  return j.dump(2) + "\n";
}

ReportEntry ReportEntryFromJson(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ReportEntry e;
    e.dataset = j.at("dataset").get<std::string>();
    e.variant = j.contains("variant") ? j.at("variant").get<std::string>()
                                      : j.at("model").get<std::string>();
    e.tool_version = j.value("tool_version", std::string());
    e.metrics.accuracy = j.at("accuracy").get<double>();
    e.metrics.macro_f1 = j.at("macro_f1").get<double>();
    e.metrics.kappa = j.at("kappa").get<double>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    Fail(ErrorCode::kReport, std::string("malformed report: ") + ex.what());
  }
}

std::string FormatComparisonTable(std::span<const ReportEntry> entries, bool csv) {
  if (entries.empty()) Fail(ErrorCode::kReport, "no reports to tabulate");
  std::vector<std::string> variants;
  std::vector<std::string> datasets;
  std::map<std::pair<std::string, std::string>, MetricTriple> cells;
  std::set<std::string> versions;
  for (const ReportEntry& e : entries) {
    if (std::find(variants.begin(), variants.end(), e.variant) == variants.end()) {
      variants.push_back(e.variant);
    }
    if (std::find(datasets.begin(), datasets.end(), e.dataset) == datasets.end()) {
      datasets.push_back(e.dataset);
    }
    cells[{e.variant, e.dataset}] = e.metrics;
    if (!e.tool_version.empty()) versions.insert(e.tool_version);
  }

  std::vector<std::string> header = {"Model"};
  for (const auto& d : datasets) {
    header.push_back(d + " Accuracy");
    header.push_back(d + " F1 (Macro)");
    header.push_back(d + " Kappa");
  }
  header.push_back("Average Performance");

  bool footnote = false;
  std::vector<std::vector<std::string>> rows;
  for (const auto& v : variants) {
    std::vector<std::string> row = {v};
    std::vector<MetricTriple> present;
    for (const auto& d : datasets) {
      const auto it = cells.find({v, d});
      if (it == cells.end()) {
        row.insert(row.end(), {"", "", ""});
        continue;
      }
      present.push_back(it->second);
      row.push_back(Fixed3(it->second.accuracy));
      row.push_back(Fixed3(it->second.macro_f1));
      row.push_back(Fixed3(it->second.kappa));
    }
    if (present.size() >= 2) {
      row.push_back(Fixed3(AveragePerformance(present)));
    } else {
      row.push_back(csv ? "" : "*");
      footnote = true;
    }
    rows.push_back(std::move(row));
  }

  std::ostringstream os;
  if (versions.size() > 1) {
    std::string joined;
    for (const auto& v : versions) joined += (joined.empty() ? "" : ", ") + v;
    os << (csv ? "# " : "") << "WARNING: reports come from different tool versions: " << joined
       << "\n";
  }
  if (csv) {
    const auto emit = [&](const std::vector<std::string>& cols) {
      for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
      os << "\n";
    };
    emit(header);
    for (const auto& r : rows) emit(r);
  } else {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
      width[c] = header[c].size();
      for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
    }
    const auto emit = [&](const std::vector<std::string>& cols) {
      std::string line;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        line += (c ? " | " : "") + Pad(cols[c], width[c]);
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      os << line << "\n";
    };
    emit(header);
    std::string rule;
    for (std::size_t c = 0; c < width.size(); ++c) {
      rule += (c ? "-+-" : "") + std::string(width[c], '-');
    }
    os << rule << "\n";
    for (const auto& r : rows) emit(r);
  }
  if (footnote) {
    os << (csv ? "# " : "")
       << "* Average Performance needs scores on at least two datasets.\n";
  }
  return os.str();
}

}  // namespace nisleep
