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

#include "nisleep/classifier.h"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "nisleep/binary_io.h"
#include "nisleep/error.h"

namespace nisleep {

namespace {

constexpr std::uint16_t kFormatVersion = 1;
constexpr char kLogisticMagic[] = "NIML";
constexpr char kTreeMagic[] = "NITR";
constexpr char kGbtMagic[] = "NIGB";

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;


void WriteTree(ByteWriter& w, const TreeModel& t) {
  w.U32(static_cast<std::uint32_t>(t.max_depth));
  w.U32(static_cast<std::uint32_t>(t.n_features));
  w.U32(static_cast<std::uint32_t>(t.nodes.size()));
  for (const TreeNode& n : t.nodes) {
    w.U32(static_cast<std::uint32_t>(n.feature));
    w.F64(n.threshold);
    w.U32(static_cast<std::uint32_t>(n.left));
    w.U32(static_cast<std::uint32_t>(n.right));
    for (double d : n.distribution) w.F64(d);
    w.F64(n.value);
  }
}

TreeModel ReadTree(ByteReader& r) {
  TreeModel t;
  t.max_depth = static_cast<int>(r.U32());
  t.n_features = static_cast<int>(r.U32());
  const std::uint32_t count = r.U32();
  constexpr std::size_t kNodeBytes = 4 + 8 + 4 + 4 + 8 * kNumStages + 8;
  if (count == 0 || count > r.remaining() / kNodeBytes) {
    Fail(ErrorCode::kStructural, "tree node count " + std::to_string(count) +
                                     " inconsistent with file size");
  }
  t.nodes.resize(count);
  for (TreeNode& n : t.nodes) {
    n.feature = static_cast<std::int32_t>(r.U32());
    n.threshold = r.F64();
    n.left = static_cast<std::int32_t>(r.U32());
    n.right = static_cast<std::int32_t>(r.U32());
    for (double& d : n.distribution) d = r.F64();
    n.value = r.F64();
  }
  // Children always follow their parent, so a forward reference check is
  // enough to rule out cycles.
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const TreeNode& n = t.nodes[i];
    if (n.is_leaf()) continue;
    const auto ok = [&](int c) {
      return c > static_cast<int>(i) && c < static_cast<int>(count);
    };
    if (n.feature >= t.n_features || !ok(n.left) || !ok(n.right)) {
      Fail(ErrorCode::kStructural, "malformed tree node " + std::to_string(i));
    }
  }
  return t;
}

void ExpectEnd(const ByteReader& r, const char* what) {
  if (r.remaining() != 0) {
    Fail(ErrorCode::kStructural, std::string("trailing bytes after ") + what);
  }
}

}  // namespace

std::string_view ClassifierKindName(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kLogistic:
      return "logistic";
    case ClassifierKind::kTree:
      return "tree";
    case ClassifierKind::kGbt:
      return "gbt";
  }
  return "unknown";
}

ClassifierKind ClassifierKindFromName(std::string_view name) {
  for (ClassifierKind k : {ClassifierKind::kLogistic, ClassifierKind::kTree, ClassifierKind::kGbt}) {
    if (ClassifierKindName(k) == name) return k;
  }
  Fail(ErrorCode::kUsage,
       "unknown classifier '" + std::string(name) + "' (expected logistic, tree or gbt)");
}

Classifier TrainClassifier(const Eigen::MatrixXd& x, std::span<const SleepStage> y,
                           const ClassifierOptions& options) {
  switch (options.kind) {
    case ClassifierKind::kLogistic:
      return TrainLogistic(x, y, options.logistic);
    case ClassifierKind::kTree:
      return TrainTree(x, y, options.tree);
    case ClassifierKind::kGbt:
      return TrainGbt(x, y, options.gbt);
  }
  Fail(ErrorCode::kUsage, "unknown classifier kind");
}

ClassifierKind KindOf(const Classifier& model) {
  return static_cast<ClassifierKind>(model.index());
}

int InputDim(const Classifier& model) {
  return std::visit(Overloaded{
                        [](const LogisticModel& m) { return static_cast<int>(m.weights.cols()); },
                        [](const TreeModel& m) { return m.n_features; },
                        [](const BoostedEnsemble& m) { return m.n_features; },
                    },
                    model);
}

Eigen::MatrixXd PredictProba(const Classifier& model, const Eigen::MatrixXd& x) {
  return std::visit(Overloaded{
                        [&](const LogisticModel& m) { return Softmax(LogisticMargins(m, x)); },
                        [&](const TreeModel& m) { return TreeProba(m, x); },
                        [&](const BoostedEnsemble& m) { return Softmax(GbtMargins(m, x)); },
                    },
                    model);
}

std::vector<SleepStage> ArgmaxStages(const Eigen::MatrixXd& proba) {
  std::vector<SleepStage> out;
  out.reserve(static_cast<std::size_t>(proba.rows()));
  for (Eigen::Index i = 0; i < proba.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < proba.cols(); ++k) {
      if (proba(i, k) > proba(i, best)) best = k;
    }
    out.push_back(StageFromIndex(static_cast<std::size_t>(best)));
  }
  return out;
}

std::vector<SleepStage> Predict(const Classifier& model, const Eigen::MatrixXd& x) {
  return ArgmaxStages(PredictProba(model, x));
}

std::array<double, kNumStages> ClassMargins(const Classifier& model,
                                            std::span<const double> x) {
  return std::visit(
      Overloaded{
          [&](const LogisticModel& m) {
            if (static_cast<Eigen::Index>(x.size()) != m.weights.cols()) {
              Fail(ErrorCode::kDimension, "input has " + std::to_string(x.size()) +
                                              " features, model expects " +
                                              std::to_string(m.weights.cols()));
            }
            const Eigen::Map<const Eigen::VectorXd> v(x.data(),
                                                      static_cast<Eigen::Index>(x.size()));
            const ClassWeights margin = m.weights * v + m.bias;
            std::array<double, kNumStages> out;
            for (std::size_t k = 0; k < kNumStages; ++k) out[k] = margin(static_cast<Eigen::Index>(k));
            return out;
          },
          [&](const TreeModel& m) {
            std::array<double, kNumStages> out = m.Leaf(x).distribution;
            for (double& v : out) v = std::log(std::max(v, 1e-12));
            return out;
          },
          [&](const BoostedEnsemble& m) { return GbtMargin(m, x); },
      },
      model);
}

std::vector<std::uint8_t> EncodeClassifier(const Classifier& model) {
  ByteWriter w;
  std::visit(Overloaded{
                 [&](const LogisticModel& m) {
                   w.Magic(kLogisticMagic);
                   w.U16(kFormatVersion);
                   w.U64(static_cast<std::uint64_t>(m.weights.cols()));
                   w.F64(m.l2);
                   w.U32(static_cast<std::uint32_t>(m.iterations));
                   w.F64(m.final_objective);
                   w.F64(m.final_gradient_norm);
                   w.U8(m.converged ? 1 : 0);
                   for (Eigen::Index k = 0; k < m.weights.rows(); ++k) {
                     for (Eigen::Index j = 0; j < m.weights.cols(); ++j) w.F64(m.weights(k, j));
                   }
                   for (Eigen::Index k = 0; k < m.bias.size(); ++k) w.F64(m.bias(k));
                 },
                 [&](const TreeModel& m) {
                   w.Magic(kTreeMagic);
                   w.U16(kFormatVersion);
                   WriteTree(w, m);
                 },
                 [&](const BoostedEnsemble& m) {
                   w.Magic(kGbtMagic);
                   w.U16(kFormatVersion);
                   w.U32(static_cast<std::uint32_t>(m.n_rounds));
                   w.U32(static_cast<std::uint32_t>(m.n_features));
                   for (Eigen::Index k = 0; k < m.base_score.size(); ++k) w.F64(m.base_score(k));
                   w.U32(static_cast<std::uint32_t>(m.training_loss.size()));
                   for (double l : m.training_loss) w.F64(l);
                   w.U32(static_cast<std::uint32_t>(m.trees.size()));
                   for (const BoostedTree& t : m.trees) {
                     w.U32(static_cast<std::uint32_t>(t.class_index));
                     w.F64(t.learning_rate);
                     WriteTree(w, t.tree);
                   }
                 },
             },
             model);
  return w.Release();
}

Classifier DecodeClassifier(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6) Fail(ErrorCode::kStructural, "model file shorter than its header");
  const std::string magic(bytes.begin(), bytes.begin() + 4);
  ByteReader r(bytes, "model file");
  r.ExpectMagic(magic);
  if (const std::uint16_t v = r.U16(); v != kFormatVersion) {
    Fail(ErrorCode::kStructural, "unsupported model format version " + std::to_string(v));
  }
  if (magic == kLogisticMagic) {
    LogisticModel m;
    const std::uint64_t p = r.U64();
    m.l2 = r.F64();
    m.iterations = static_cast<int>(r.U32());
    m.final_objective = r.F64();
    m.final_gradient_norm = r.F64();
    m.converged = r.U8() != 0;
    if (p > r.remaining() / (8 * kNumStages)) {
      Fail(ErrorCode::kStructural, "logistic model truncated");
    }
    m.weights.resize(static_cast<Eigen::Index>(kNumStages), static_cast<Eigen::Index>(p));
    for (Eigen::Index k = 0; k < m.weights.rows(); ++k) {
      for (Eigen::Index j = 0; j < m.weights.cols(); ++j) m.weights(k, j) = r.F64();
    }
    for (Eigen::Index k = 0; k < m.bias.size(); ++k) m.bias(k) = r.F64();
    ExpectEnd(r, "logistic model");
    if (!m.weights.allFinite() || !m.bias.allFinite()) {
      Fail(ErrorCode::kData, "logistic model has non-finite parameters");
    }
    return m;
  }
  if (magic == kTreeMagic) {
    TreeModel t = ReadTree(r);
    ExpectEnd(r, "tree model");
    return t;
  }
  if (magic == kGbtMagic) {
    BoostedEnsemble m;
    m.n_rounds = static_cast<int>(r.U32());
    m.n_features = static_cast<int>(r.U32());
    for (Eigen::Index k = 0; k < m.base_score.size(); ++k) m.base_score(k) = r.F64();
    const std::uint32_t losses = r.U32();
    if (losses > r.remaining() / 8) Fail(ErrorCode::kStructural, "boosted model truncated");
    m.training_loss.resize(losses);
    for (double& l : m.training_loss) l = r.F64();
    const std::uint32_t trees = r.U32();
    if (trees > r.remaining() / 12) Fail(ErrorCode::kStructural, "boosted model truncated");
    m.trees.reserve(trees);
    for (std::uint32_t i = 0; i < trees; ++i) {
      BoostedTree t;
      t.class_index = static_cast<int>(r.U32());
      if (t.class_index < 0 || t.class_index >= static_cast<int>(kNumStages)) {
        Fail(ErrorCode::kStructural, "boosted tree " + std::to_string(i) + " has bad class");
      }
      t.learning_rate = r.F64();
      t.tree = ReadTree(r);
      if (t.tree.n_features != m.n_features) {
        Fail(ErrorCode::kStructural, "boosted tree " + std::to_string(i) + " feature count");
      }
      m.trees.push_back(std::move(t));
    }
    ExpectEnd(r, "boosted model");
    return m;
  }
  Fail(ErrorCode::kStructural, "unrecognized model magic '" + magic + "'");
}

void SaveClassifier(const std::filesystem::path& path, const Classifier& model) {
  WriteFileAtomic(path, EncodeClassifier(model));
}

Classifier LoadClassifier(const std::filesystem::path& path) {
  return DecodeClassifier(ReadFileBytes(path));
}

std::string LogisticModelToJson(const LogisticModel& model,
                                std::span<const std::string> feature_names) {
  if (static_cast<Eigen::Index>(feature_names.size()) != model.weights.cols()) {
    Fail(ErrorCode::kDimension, "feature name count does not match model width");
  }
  nlohmann::ordered_json j;
  auto& classes = j["classes"] = nlohmann::ordered_json::array();
  for (SleepStage s : kAllStages) classes.push_back(std::string(StageName(s)));
  j["features"] = std::vector<std::string>(feature_names.begin(), feature_names.end());
  auto& weights = j["weights"] = nlohmann::ordered_json::array();
  for (Eigen::Index k = 0; k < model.weights.rows(); ++k) {
    std::vector<double> row(static_cast<std::size_t>(model.weights.cols()));
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c) {
      row[static_cast<std::size_t>(c)] = model.weights(k, c);
    }
    weights.push_back(row);
  }
  j["bias"] = std::vector<double>(model.bias.data(), model.bias.data() + model.bias.size());
  j["l2"] = model.l2;
  j["iterations"] = model.iterations;
  j["final_objective"] = model.final_objective;
  j["converged"] = model.converged;
  return j.dump(2) + "\n";
}

}  // namespace nisleep
