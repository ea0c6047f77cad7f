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

#include "nisleep/pipeline.h"

#include <algorithm>
#include <chrono>
#include <map>
#include <optional>

#include "json.hpp"
#include "nisleep/binary_io.h"
#include "nisleep/classifier.h"
#include "nisleep/embed.h"
#include "nisleep/epoch_store.h"
#include "nisleep/error.h"
#include "nisleep/explain.h"
#include "nisleep/feature_store.h"
#include "nisleep/features.h"
#include "nisleep/metrics.h"
#include "nisleep/project.h"
#include "nisleep/psg.h"
#include "nisleep/select.h"

namespace nisleep {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr char kSplitFile[] = "split.json";
constexpr char kFeaturesTrain[] = "features_train.nisf";
constexpr char kFeaturesTest[] = "features_test.nisf";
constexpr char kCatalogFile[] = "catalog.json";
constexpr char kSelectionFile[] = "selection.json";
constexpr char kSelectedTrain[] = "selected_train.nisf";
constexpr char kSelectedTest[] = "selected_test.nisf";
constexpr char kEmbeddingsTrain[] = "embeddings_train.nise";
constexpr char kEmbeddingsTest[] = "embeddings_test.nise";
constexpr char kProjectionFile[] = "projection.nipm";
constexpr char kRepresentationTrain[] = "representation_train.nisf";
constexpr char kRepresentationTest[] = "representation_test.nisf";
constexpr char kReportFile[] = "report.json";
constexpr char kAttributionsFile[] = "attributions.csv";
constexpr char kImportanceFile[] = "importance.csv";
constexpr char kManifestFile[] = "manifest.json";
constexpr char kIngestLedgerFile[] = "ingest_ledger.json";

std::string ReadText(const fs::path& path) {
  const auto bytes = ReadFileBytes(path);
  return std::string(bytes.begin(), bytes.end());
}

Json ParseJsonFile(const fs::path& path) {
  try {
    return Json::parse(ReadText(path));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, path.filename().string() + ": " + e.what());
  }
}

// Error::what() already carries the category prefix; strip it before the
// message is wrapped again.
std::string BareMessage(const Error& e) {
  const std::string what = e.what();
  const std::string prefix = std::string(ErrorCodeName(e.code())) + " error: ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

struct SplitIds {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

SplitIds LoadSplit(const fs::path& run_dir) {
  const Json j = ParseJsonFile(run_dir / kSplitFile);
  try {
    return {j.at("train").get<std::vector<std::string>>(),
            j.at("test").get<std::vector<std::string>>()};
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("split.json: ") + e.what());
  }
}

std::vector<EpochedRecord> LoadStore(const RunConfig& config) {
  if (config.store.empty()) Fail(ErrorCode::kUsage, "no epoch store configured (store = ...)");
  std::vector<EpochedRecord> records = LoadEpochStore(config.store);
  if (records.empty()) {
    Fail(ErrorCode::kUsage, "epoch store '" + config.store + "' holds no records");
  }
  return records;
}

FeatureTable ExtractTable(const std::vector<EpochedRecord>& records,
                          const std::vector<std::string>& ids, const RunConfig& config) {
  std::map<std::string, const EpochedRecord*> by_id;
  for (const auto& r : records) by_id[r.subject_id] = &r;
  const Catalog catalog = CatalogFromName(config.catalog);
  const SpectralOptions spectral{config.welch_window_s, config.welch_overlap};
  std::vector<FeatureMatrix> parts;
  FeatureTable table;
  for (const auto& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      Fail(ErrorCode::kProvenance, "subject '" + id + "' is not in the epoch store");
    }
    parts.push_back(ExtractFeatures(*it->second, catalog, spectral));
    if (!parts.back().labels) {
      Fail(ErrorCode::kLabeling, "subject '" + id + "' has unlabeled epochs");
    }
    table.subject_ids.push_back(id);
    table.epoch_counts.push_back(static_cast<std::size_t>(parts.back().rows()));
  }
  std::vector<const FeatureMatrix*> ptrs;
  for (const auto& p : parts) ptrs.push_back(&p);
  table.matrix = ConcatRows(ptrs);
  return table;
}

EmbeddingMatrix EmbeddingsFor(const EmbeddingMatrix& all, const FeatureTable& table) {
  EmbeddingMatrix out;
  out.source = all.source;
  out.subject_ids = table.subject_ids;
  out.epoch_counts = table.epoch_counts;
  out.values.resize(table.matrix.rows(), all.dim());
  Eigen::Index row = 0;
  for (std::size_t s = 0; s < table.subject_ids.size(); ++s) {
    const Eigen::MatrixXd rows = all.SubjectRows(table.subject_ids[s]);
    if (static_cast<std::size_t>(rows.rows()) != table.epoch_counts[s]) {
      Fail(ErrorCode::kProvenance,
           "subject '" + table.subject_ids[s] + "' has " + std::to_string(rows.rows()) +
               " embedding rows but " + std::to_string(table.epoch_counts[s]) + " epochs");
    }
    out.values.middleRows(row, rows.rows()) = rows;
    row += rows.rows();
  }
  return out;
}

FeatureTable RepresentationTable(const FeatureTable& selected, const RepresentationMatrix& rep) {
  FeatureTable t;
  t.subject_ids = selected.subject_ids;
  t.epoch_counts = selected.epoch_counts;
  t.matrix.descriptors = selected.matrix.descriptors;
  t.matrix.values = rep.values;
  t.matrix.labels = selected.matrix.labels;
  return t;
}

const std::vector<SleepStage>& RequireLabels(const FeatureTable& t, const char* what) {
  if (!t.matrix.labels) Fail(ErrorCode::kLabeling, std::string(what) + " has no labels");
  return *t.matrix.labels;
}

ClassifierOptions ClassifierOptionsFrom(const RunConfig& c) {
  ClassifierOptions o;
  o.kind = ClassifierKindFromName(c.classifier);
  o.logistic.l2 = c.logistic_l2;
  o.logistic.max_iter = static_cast<int>(c.logistic_max_iter);
  o.logistic.tol = c.logistic_tol;
  o.logistic.class_weighted = c.class_weighted;
  o.tree.max_depth = static_cast<int>(c.tree_max_depth);
  o.tree.min_leaf = static_cast<int>(c.tree_min_leaf);
  o.tree.class_weighted = c.class_weighted;
  o.gbt.n_rounds = static_cast<int>(c.gbt_n_rounds);
  o.gbt.learning_rate = c.gbt_learning_rate;
  o.gbt.max_depth = static_cast<int>(c.gbt_max_depth);
  o.gbt.min_leaf = static_cast<int>(c.gbt_min_leaf);
  o.gbt.class_weighted = c.class_weighted;
  return o;
}

void DoSplit(const RunConfig& config, const fs::path& run_dir) {
  const std::vector<EpochedRecord> records = LoadStore(config);
  const SubjectSplit split = SplitBySubject(records, config.train_fraction, config.seed);
  Json j;
  j["seed"] = config.seed;
  j["train_fraction"] = config.train_fraction;
  auto& train = j["train"] = Json::array();
  for (std::size_t i : split.train) train.push_back(records[i].subject_id);
  auto& test = j["test"] = Json::array();
  for (std::size_t i : split.test) test.push_back(records[i].subject_id);
  WriteFileAtomic(run_dir / kSplitFile, j.dump(2) + "\n");
}

void DoExtract(const RunConfig& config, const fs::path& run_dir) {
  const SplitIds split = LoadSplit(run_dir);
  const std::vector<EpochedRecord> records = LoadStore(config);
  const FeatureTable train = ExtractTable(records, split.train, config);
  const FeatureTable test = ExtractTable(records, split.test, config);
  if (train.matrix.names() != test.matrix.names()) {
    Fail(ErrorCode::kCatalog, "train and test subjects yield different feature catalogs");
  }
  SaveFeatureTable(run_dir / kFeaturesTrain, train);
  SaveFeatureTable(run_dir / kFeaturesTest, test);
  WriteFileAtomic(run_dir / kCatalogFile, CatalogManifestJson(train.matrix.descriptors));
}

void DoSelect(const RunConfig& config, const fs::path& run_dir) {
  FeatureTable train = LoadFeatureTable(run_dir / kFeaturesTrain);
  FeatureTable test = LoadFeatureTable(run_dir / kFeaturesTest);
  auto [mask, selected] = SelectTopFraction(train.matrix, config.select_fraction);
  train.matrix = std::move(selected);
  test.matrix = ApplyMask(test.matrix, mask);
  WriteFileAtomic(run_dir / kSelectionFile, SelectionMaskToJson(mask));
  SaveFeatureTable(run_dir / kSelectedTrain, train);
  SaveFeatureTable(run_dir / kSelectedTest, test);
}

void DoEmbed(const RunConfig& config, const fs::path& run_dir) {
  const FeatureTable train = LoadFeatureTable(run_dir / kSelectedTrain);
  const FeatureTable test = LoadFeatureTable(run_dir / kSelectedTest);
  EmbeddingMatrix all;
  if (config.embeddings == "synthetic") {
    if (config.embed_dim < 1) Fail(ErrorCode::kUsage, "embed_dim must be positive");
    const FeatureMatrix joined = ConcatRows({&train.matrix, &test.matrix});
    all = SynthEmbeddings(joined, static_cast<std::size_t>(config.embed_dim),
                          config.embed_noise, config.seed);
    all.subject_ids = train.subject_ids;
    all.subject_ids.insert(all.subject_ids.end(), test.subject_ids.begin(),
                           test.subject_ids.end());
    all.epoch_counts = train.epoch_counts;
    all.epoch_counts.insert(all.epoch_counts.end(), test.epoch_counts.begin(),
                            test.epoch_counts.end());
  } else {
    all = LoadEmbeddings(config.embeddings);
  }
  SaveEmbeddings(run_dir / kEmbeddingsTrain, EmbeddingsFor(all, train));
  SaveEmbeddings(run_dir / kEmbeddingsTest, EmbeddingsFor(all, test));
}

void DoFitProjection(const RunConfig& config, const fs::path& run_dir) {
  const FeatureTable train = LoadFeatureTable(run_dir / kSelectedTrain);
  const EmbeddingMatrix e = LoadEmbeddings(run_dir / kEmbeddingsTrain,
                                           static_cast<std::size_t>(train.matrix.rows()));
  SaveProjectionModel(run_dir / kProjectionFile,
                      FitProjection(e.values, train.matrix, config.lambda));
}

void DoTransform(const RunConfig&, const fs::path& run_dir) {
  const ProjectionModel model = LoadProjectionModel(run_dir / kProjectionFile);
  for (const auto& [selected_file, embed_file, out_file] :
       {std::tuple{kSelectedTrain, kEmbeddingsTrain, kRepresentationTrain},
        std::tuple{kSelectedTest, kEmbeddingsTest, kRepresentationTest}}) {
    const FeatureTable selected = LoadFeatureTable(run_dir / selected_file);
    if (selected.matrix.names() != model.descriptor_names) {
      Fail(ErrorCode::kDimension, "projection was fitted on different features");
    }
    const EmbeddingMatrix e =
        LoadEmbeddings(run_dir / embed_file, static_cast<std::size_t>(selected.matrix.rows()));
    SaveFeatureTable(run_dir / out_file, RepresentationTable(selected, Transform(e.values, model)));
  }
}

void DoTrain(const RunConfig& config, const fs::path& run_dir) {
  const FeatureTable train = LoadFeatureTable(run_dir / kRepresentationTrain);
  const Classifier model = TrainClassifier(train.matrix.values,
                                           RequireLabels(train, "training representation"),
                                           ClassifierOptionsFrom(config));
  SaveClassifier(run_dir / ModelFileName(config), model);
  if (const auto* linear = std::get_if<LogisticModel>(&model)) {
    WriteFileAtomic(run_dir / "model.json",
                    LogisticModelToJson(*linear, train.matrix.names()));
  }
}

void DoEvaluate(const RunConfig& config, const fs::path& run_dir) {
  const Classifier model = LoadClassifier(run_dir / ModelFileName(config));
  const FeatureTable test = LoadFeatureTable(run_dir / kRepresentationTest);
  const std::vector<SleepStage> pred = Predict(model, test.matrix.values);
  const EvalReport report = Evaluate(RequireLabels(test, "test representation"), pred);
  Json j = Json::parse(EvalReportToJson(report, config.EffectiveDataset(),
                                        std::string(ClassifierKindName(KindOf(model)))));
  j["variant"] = config.EffectiveVariant();
  j["tool_version"] = std::string(kToolVersion);
  WriteFileAtomic(run_dir / kReportFile, j.dump(2) + "\n");
}

void DoExplain(const RunConfig& config, const fs::path& run_dir) {
  const Classifier model = LoadClassifier(run_dir / ModelFileName(config));
  const FeatureTable train = LoadFeatureTable(run_dir / kRepresentationTrain);
  const FeatureTable test = LoadFeatureTable(run_dir / kRepresentationTest);
  const Eigen::VectorXd background = train.matrix.values.colwise().mean().transpose();
  Eigen::Index rows = test.matrix.rows();
  if (config.explain_samples > 0) rows = std::min<Eigen::Index>(rows, config.explain_samples);
  ExplainOptions options;
  options.n_permutations = static_cast<int>(config.explain_permutations);
  options.seed = config.seed;
  const AttributionMatrix attr = ExplainClassifier(model, test.matrix.values.topRows(rows),
                                                   background, test.matrix.names(), options);
  const int k = static_cast<int>(std::min<std::int64_t>(config.explain_top_k, attr.p));
  WriteFileAtomic(run_dir / kAttributionsFile, AttributionToCsv(attr));
  WriteFileAtomic(run_dir / kImportanceFile,
                  ImportanceSummaryToCsv(SummarizeImportance(attr, k)));
}

std::vector<std::string> StageOutputs(PipelineStage stage, const RunConfig& config) {
  switch (stage) {
    case PipelineStage::kSplit:
      return {kSplitFile};
    case PipelineStage::kExtract:
      return {kFeaturesTrain, kFeaturesTest, kCatalogFile};
    case PipelineStage::kSelect:
      return {kSelectionFile, kSelectedTrain, kSelectedTest};
    case PipelineStage::kEmbed:
      return {kEmbeddingsTrain, kEmbeddingsTest};
    case PipelineStage::kFitProjection:
      return {kProjectionFile};
    case PipelineStage::kTransform:
      return {kRepresentationTrain, kRepresentationTest};
    case PipelineStage::kTrain:
      if (config.classifier == "logistic") return {ModelFileName(config), "model.json"};
      return {ModelFileName(config)};
    case PipelineStage::kEvaluate:
      return {kReportFile};
    case PipelineStage::kExplain:
      return {kAttributionsFile, kImportanceFile};
  }
  return {};
}

}  // namespace

std::string_view PipelineStageName(PipelineStage stage) {
  switch (stage) {
    case PipelineStage::kSplit:
      return "split";
    case PipelineStage::kExtract:
      return "extract";
    case PipelineStage::kSelect:
      return "select";
    case PipelineStage::kEmbed:
      return "embed";
    case PipelineStage::kFitProjection:
      return "fit_projection";
    case PipelineStage::kTransform:
      return "transform";
    case PipelineStage::kTrain:
      return "train";
    case PipelineStage::kEvaluate:
      return "evaluate";
    case PipelineStage::kExplain:
      return "explain";
  }
  return "unknown";
}

std::string ModelFileName(const RunConfig& config) {
  switch (ClassifierKindFromName(config.classifier)) {
    case ClassifierKind::kLogistic:
      return "model.niml";
    case ClassifierKind::kTree:
      return "model.nitr";
    case ClassifierKind::kGbt:
      return "model.nigb";
  }
  return "model.bin";
}

void RunStage(PipelineStage stage, const RunConfig& config, const fs::path& run_dir) {
  const std::string name(PipelineStageName(stage));
  try {
    fs::create_directories(run_dir);
    switch (stage) {
      case PipelineStage::kSplit:
        return DoSplit(config, run_dir);
      case PipelineStage::kExtract:
        return DoExtract(config, run_dir);
      case PipelineStage::kSelect:
        return DoSelect(config, run_dir);
      case PipelineStage::kEmbed:
        return DoEmbed(config, run_dir);
      case PipelineStage::kFitProjection:
        return DoFitProjection(config, run_dir);
      case PipelineStage::kTransform:
        return DoTransform(config, run_dir);
      case PipelineStage::kTrain:
        return DoTrain(config, run_dir);
      case PipelineStage::kEvaluate:
        return DoEvaluate(config, run_dir);
      case PipelineStage::kExplain:
        return DoExplain(config, run_dir);
    }
  } catch (const Error& e) {
    throw Error(e.code(), "stage '" + name + "': " + BareMessage(e), e.byte_offset());
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::kIo, "stage '" + name + "': " + e.what());
  }
}

RunSummary CmdRun(const RunConfig& config, const fs::path& run_dir) {
  // Surface configuration mistakes before any work is done.
  CatalogFromName(config.catalog);
  ClassifierKindFromName(config.classifier);

  Json timings = Json::object();
  Json stages = Json::array();
  for (PipelineStage stage : kPipelineOrder) {
    const auto start = std::chrono::steady_clock::now();
    RunStage(stage, config, run_dir);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    stages.push_back(std::string(PipelineStageName(stage)));
    timings[std::string(PipelineStageName(stage))] = elapsed.count();
  }

  Json manifest;
  manifest["tool"] = "nisleep";
  manifest["tool_version"] = std::string(kToolVersion);
  Json cfg = Json::object();
  for (const auto& [k, v] : ConfigEntries(config)) cfg[k] = v;
  manifest["config"] = std::move(cfg);

  Json inputs = Json::array();
  std::vector<fs::path> store_files;
  for (const auto& entry : fs::directory_iterator(config.store)) {
    if (entry.is_regular_file() && entry.path().extension() == kEpochStoreExtension) {
      store_files.push_back(entry.path());
    }
  }
  std::sort(store_files.begin(), store_files.end());
  for (const auto& f : store_files) {
    inputs.push_back({{"path", f.string()}, {"sha256", Sha256Hex(ReadFileBytes(f))}});
  }
  if (config.embeddings != "synthetic") {
    inputs.push_back({{"path", config.embeddings},
                      {"sha256", Sha256Hex(ReadFileBytes(config.embeddings))}});
  }
  manifest["inputs"] = std::move(inputs);
  manifest["stages"] = std::move(stages);
  manifest["timings_s"] = std::move(timings);

  const SelectionMask mask = SelectionMaskFromJson(ReadText(run_dir / kSelectionFile));
  RunSummary summary;
  summary.n_features = mask.descriptor_names.size();
  summary.n_selected = mask.kept_indices.size();
  manifest["n_features"] = summary.n_features;
  manifest["n_selected"] = summary.n_selected;
  const Json split = ParseJsonFile(run_dir / kSplitFile);
  manifest["train_subjects"] = split.at("train");
  manifest["test_subjects"] = split.at("test");

  Json outputs = Json::object();
  for (PipelineStage stage : kPipelineOrder) {
    for (const auto& name : StageOutputs(stage, config)) {
      outputs[name] = {{"path", (run_dir / name).string()},
                       {"sha256", Sha256Hex(ReadFileBytes(run_dir / name))}};
    }
  }
  manifest["outputs"] = std::move(outputs);

  const Json report = ParseJsonFile(run_dir / kReportFile);
  summary.accuracy = report.at("accuracy").get<double>();
  summary.macro_f1 = report.at("macro_f1").get<double>();
  summary.kappa = report.at("kappa").get<double>();
  summary.manifest = run_dir / kManifestFile;
  WriteFileAtomic(summary.manifest, manifest.dump(2) + "\n");
  return summary;
}

IngestResult CmdIngest(const IngestOptions& options) {
  if (!fs::is_directory(options.edf_dir)) {
    Fail(ErrorCode::kUsage, "EDF directory not found: " + options.edf_dir.string());
  }
  std::vector<fs::path> edfs;
  for (const auto& entry : fs::directory_iterator(options.edf_dir)) {
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (entry.is_regular_file() && ext == ".edf") edfs.push_back(entry.path());
  }
  if (edfs.empty()) {
    Fail(ErrorCode::kUsage, "no EDF files in " + options.edf_dir.string());
  }
  std::sort(edfs.begin(), edfs.end());
  fs::create_directories(options.out_store);

  IngestResult result;
  std::map<std::string, std::string> seen;  // subject id -> source file
  for (const fs::path& edf : edfs) {
    const std::string file = edf.filename().string();
    try {
      PsgRecord record = ReadEdfFile(edf);
      if (record.subject_id.empty() || record.subject_id == "X") {
        record.subject_id = edf.stem().string();
      }
      if (record.subject_id.find_first_of("/\\") != std::string::npos) {
        Fail(ErrorCode::kStructural, "subject id '" + record.subject_id + "' is not a file name");
      }
      std::optional<std::vector<StageLabel>> labels;
      if (!options.label_dir.empty()) {
        const fs::path label_file = options.label_dir / (edf.stem().string() + ".tsv");
        if (!fs::exists(label_file)) {
          Fail(ErrorCode::kLabeling, "label file not found: " + label_file.string());
        }
        labels = AlignStages(ParseLabelFile(ReadText(label_file)), options.schema);
      }
      const EpochedRecord epoched = EpochRecord(record, labels, options.epoch_len_s);
      if (epoched.epochs.empty()) Fail(ErrorCode::kAlignment, "record has no usable epochs");
      if (const auto it = seen.find(epoched.subject_id); it != seen.end()) {
        Fail(ErrorCode::kStructural,
             "subject '" + epoched.subject_id + "' already ingested from " + it->second);
      }
      const std::string out_name = epoched.subject_id + kEpochStoreExtension;
      SaveEpochedRecord(options.out_store / out_name, epoched);
      seen[epoched.subject_id] = file;
      result.stored.push_back(out_name);
    } catch (const Error& e) {
      result.ledger.push_back({file, e.what()});
    } catch (const fs::filesystem_error& e) {
      result.ledger.push_back({file, e.what()});
    }
  }
  Json j;
  j["stored"] = result.stored;
  auto& failures = j["failures"] = Json::array();
  for (const auto& f : result.ledger) failures.push_back({{"file", f.file}, {"error", f.error}});
  WriteFileAtomic(options.out_store / kIngestLedgerFile, j.dump(2) + "\n");
  return result;
}

std::string CmdReport(std::span<const fs::path> manifests, bool csv) {
  if (manifests.empty()) Fail(ErrorCode::kUsage, "report needs at least one manifest");
  std::vector<std::string> missing;
  std::vector<ReportEntry> entries;
  for (const fs::path& m : manifests) {
    if (!fs::exists(m)) {
      missing.push_back(m.string());
      continue;
    }
    const Json manifest = ParseJsonFile(m);
    const fs::path report = m.parent_path() / kReportFile;
    if (!fs::exists(report)) {
      missing.push_back(report.string());
      continue;
    }
    ReportEntry e = ReportEntryFromJson(ReadText(report));
    e.tool_version = manifest.value("tool_version", e.tool_version);
    entries.push_back(std::move(e));
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& s : missing) list += (list.empty() ? "" : ", ") + s;
    Fail(ErrorCode::kReport, "missing report files: " + list);
  }
  return FormatComparisonTable(entries, csv);
}

}  // namespace nisleep
