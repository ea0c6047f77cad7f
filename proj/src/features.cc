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

#include "nisleep/features.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <utility>

#include "nisleep/error.h"

namespace nisleep {

namespace {

std::string Upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

struct MeasureInfo {
  std::string_view token;
  FeatureKind kind;
  // 0 = no band, 1 = one band, 2 = numerator/denominator bands.
  int bands;
};

constexpr MeasureInfo kMeasures[] = {
    {"relpow", FeatureKind::kBandPowerRel, 1},
    {"abspow", FeatureKind::kBandPowerAbs, 1},
    {"band_rms", FeatureKind::kStatistical, 1},
    {"ratio", FeatureKind::kRatio, 2},
    {"rms", FeatureKind::kStatistical, 0},
    {"p95abs", FeatureKind::kStatistical, 0},
    {"mean", FeatureKind::kStatistical, 0},
    {"std", FeatureKind::kStatistical, 0},
    {"skew", FeatureKind::kStatistical, 0},
    {"kurt", FeatureKind::kStatistical, 0},
    {"iqr", FeatureKind::kStatistical, 0},
    {"zero_cross", FeatureKind::kStatistical, 0},
    {"abs_energy", FeatureKind::kStatistical, 0},
    {"hj_activity", FeatureKind::kHjorth, 0},
    {"hj_mobility", FeatureKind::kHjorth, 0},
    {"hj_complexity", FeatureKind::kHjorth, 0},
    {"spec_entropy", FeatureKind::kEntropy, 0},
    {"median_freq", FeatureKind::kStatistical, 0},
};

const MeasureInfo* FindMeasure(std::string_view token) {
  for (const auto& m : kMeasures) {
    if (m.token == token) return &m;
  }
  return nullptr;
}

FeatureDescriptor Make(const std::string& channel, std::string_view measure,
                       std::optional<std::string_view> band = std::nullopt,
                       std::optional<std::string_view> denominator = std::nullopt,
                       std::string_view window = "") {
  const MeasureInfo* info = FindMeasure(measure);
  FeatureDescriptor d;
  d.channel = channel;
  d.kind = info->kind;
  d.measure = std::string(measure);
  if (band) d.band = StandardBand(*band);
  if (denominator) d.denominator = StandardBand(*denominator);
  d.window = std::string(window);
  d.name = FeatureName(d);
  return d;
}

constexpr std::string_view kElectrodes[] = {
    "FP1", "FP2", "FPZ", "F3", "F4", "F7", "F8", "FZ", "C3", "C4", "CZ",
    "T3",  "T4",  "T5",  "T6", "T7", "T8", "P3", "P4", "PZ", "O1", "O2", "OZ"};

std::vector<std::pair<std::string, ChannelRole>> RecognizedChannels(
    const std::vector<std::string>& channel_names) {
  std::vector<std::pair<std::string, ChannelRole>> out;
  for (const auto& name : channel_names) {
    const ChannelRole role = ResolveChannelRole(name);
    if (role != ChannelRole::kOther) out.emplace_back(name, role);
  }
  if (out.empty()) {
    Fail(ErrorCode::kCatalog, "no EEG, EOG or EMG channel recognized");
  }
  return out;
}

void AppendShort(const std::string& ch, ChannelRole role,
                 std::vector<FeatureDescriptor>& out) {
  for (const auto& b : StandardBands()) out.push_back(Make(ch, "relpow", b.name));
  if (role == ChannelRole::kEmg) {
    out.push_back(Make(ch, "ratio", "delta", "beta"));
    out.push_back(Make(ch, "rms"));
    out.push_back(Make(ch, "p95abs"));
    return;
  }
  out.push_back(Make(ch, "band_rms", "delta"));
  out.push_back(Make(ch, "band_rms", "sigma"));
  out.push_back(Make(ch, "ratio", "delta", "beta"));
  if (role == ChannelRole::kEeg) out.push_back(Make(ch, "ratio", "theta", "alpha"));
}

void AppendLong(const std::string& ch, std::string_view window,
                std::vector<FeatureDescriptor>& out) {
  for (std::string_view m : {"mean", "std", "skew", "kurt", "iqr", "zero_cross",
                             "abs_energy", "hj_activity", "hj_mobility",
                             "hj_complexity"}) {
    out.push_back(Make(ch, m, std::nullopt, std::nullopt, window));
  }
  for (const auto& b : StandardBands()) {
    out.push_back(Make(ch, "abspow", b.name, std::nullopt, window));
  }
  for (const auto& b : StandardBands()) {
    out.push_back(Make(ch, "relpow", b.name, std::nullopt, window));
  }
  out.push_back(Make(ch, "spec_entropy", std::nullopt, std::nullopt, window));
  out.push_back(Make(ch, "median_freq", std::nullopt, std::nullopt, window));
}

// Lazily computed per (channel, window) quantities for one epoch.
class WindowContext {
 public:
  WindowContext(std::vector<double> signal, double sampling_hz,
                const SpectralOptions& options)
      : signal_(std::move(signal)), sampling_hz_(sampling_hz), options_(options) {}

  std::span<const double> signal() const { return signal_; }

  const Spectrum& spectrum() {
    if (!spectrum_) {
      spectrum_ = WelchPsd(signal_, sampling_hz_, options_.window_s, options_.overlap);
    }
    return *spectrum_;
  }

  const HjorthParameters& hjorth() {
    if (!hjorth_) hjorth_ = Hjorth(signal_);
    return *hjorth_;
  }

 private:
  std::vector<double> signal_;
  double sampling_hz_;
  SpectralOptions options_;
  std::optional<Spectrum> spectrum_;
  std::optional<HjorthParameters> hjorth_;
};

double Evaluate(const FeatureDescriptor& d, WindowContext& ctx) {
  const std::string& m = d.measure;
  if (m == "relpow") return BandPower(ctx.spectrum(), *d.band, true);
  if (m == "abspow") return BandPower(ctx.spectrum(), *d.band, false);
  if (m == "band_rms") return std::sqrt(BandPower(ctx.spectrum(), *d.band, false));
  if (m == "ratio") {
    const double den = BandPower(ctx.spectrum(), *d.denominator, false);
    return den > 0.0 ? BandPower(ctx.spectrum(), *d.band, false) / den : 0.0;
  }
  if (m == "rms") return Rms(ctx.signal());
  if (m == "p95abs") {
    std::vector<double> a(ctx.signal().begin(), ctx.signal().end());
    for (double& v : a) v = std::abs(v);
    return Quantile(a, 0.95);
  }
  if (m == "mean") return Mean(ctx.signal());
  if (m == "std") return PopulationStd(ctx.signal());
  if (m == "skew") return Skewness(ctx.signal());
  if (m == "kurt") return ExcessKurtosis(ctx.signal());
  if (m == "iqr") return Quantile(ctx.signal(), 0.75) - Quantile(ctx.signal(), 0.25);
  if (m == "zero_cross") return static_cast<double>(ZeroCrossings(ctx.signal()));
  if (m == "abs_energy") return AbsEnergy(ctx.signal());
  if (m == "hj_activity") return ctx.hjorth().activity;
  if (m == "hj_mobility") return ctx.hjorth().mobility;
  if (m == "hj_complexity") return ctx.hjorth().complexity;
  if (m == "spec_entropy") return SpectralEntropy(ctx.spectrum());
  if (m == "median_freq") return MedianFrequency(ctx.spectrum());
  Fail(ErrorCode::kCatalog, "unknown measure '" + m + "'");
}

FeatureMatrix Extract(const EpochedRecord& record,
                      std::vector<FeatureDescriptor> descriptors,
                      const SpectralOptions& options) {
  if (record.epochs.empty()) {
    Fail(ErrorCode::kData, "record '" + record.subject_id + "' has no epochs");
  }
  std::map<std::string, std::size_t> channel_index;
  for (std::size_t c = 0; c < record.channels.size(); ++c) {
    channel_index[record.channels[c].name] = c;
  }

  FeatureMatrix fm;
  fm.values.resize(static_cast<Eigen::Index>(record.epochs.size()),
                   static_cast<Eigen::Index>(descriptors.size()));
  bool all_labeled = true;
  std::vector<SleepStage> labels;
  for (std::size_t i = 0; i < record.epochs.size(); ++i) {
    const Epoch& epoch = record.epochs[i];
    if (epoch.label) {
      labels.push_back(*epoch.label);
    } else {
      all_labeled = false;
    }
    std::map<std::pair<std::size_t, std::string>, WindowContext> contexts;
    for (std::size_t j = 0; j < descriptors.size(); ++j) {
      const FeatureDescriptor& d = descriptors[j];
      const std::size_t c = channel_index.at(d.channel);
      auto key = std::make_pair(c, d.window);
      auto it = contexts.find(key);
      if (it == contexts.end()) {
        const auto& w = epoch.windows[c];
        std::size_t begin = 0;
        std::size_t end = w.size();
        if (d.window == "h1") end = w.size() / 2;
        if (d.window == "h2") begin = w.size() / 2;
        std::vector<double> sig(w.begin() + static_cast<std::ptrdiff_t>(begin),
                                w.begin() + static_cast<std::ptrdiff_t>(end));
        it = contexts
                 .emplace(key, WindowContext(std::move(sig),
                                             record.channels[c].sampling_hz,
                                             options))
                 .first;
      }
      const double v = Evaluate(d, it->second);
      fm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::isfinite(v) ? v : 0.0;
    }
  }
  fm.descriptors = std::move(descriptors);
  if (all_labeled) fm.labels = std::move(labels);
  return fm;
}

}  // namespace

std::string_view FeatureKindName(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kBandPowerAbs: return "band_power_abs";
    case FeatureKind::kBandPowerRel: return "band_power_rel";
    case FeatureKind::kHjorth: return "hjorth";
    case FeatureKind::kStatistical: return "statistical";
    case FeatureKind::kEntropy: return "entropy";
    case FeatureKind::kRatio: return "ratio";
  }
  return "?";
}

ChannelRole ResolveChannelRole(std::string_view channel_name) {
  const std::string n = Upper(channel_name);
  if (n.find("EMG") != std::string::npos || n.find("CHIN") != std::string::npos) {
    return ChannelRole::kEmg;
  }
  if (n.find("EOG") != std::string::npos || n.rfind("ROC", 0) == 0 ||
      n.rfind("LOC", 0) == 0 || n.rfind("E1-", 0) == 0 ||
      n.rfind("E2-", 0) == 0) {
    return ChannelRole::kEog;
  }
  if (n.find("EEG") != std::string::npos) return ChannelRole::kEeg;
  const std::string head = n.substr(0, n.find_first_of("- :"));
  for (std::string_view e : kElectrodes) {
    if (head == e) return ChannelRole::kEeg;
  }
  return ChannelRole::kOther;
}

const std::vector<BandDefinition>& StandardBands() {
  static const std::vector<BandDefinition>* bands =
      new std::vector<BandDefinition>{{"slow", 0.5, 2.0},   {"delta", 0.5, 4.0},
                                      {"theta", 4.0, 8.0},  {"alpha", 8.0, 12.0},
                                      {"sigma", 12.0, 16.0}, {"beta", 8.0, 20.0}};
  return *bands;
}

const BandDefinition& StandardBand(std::string_view name) {
  for (const auto& b : StandardBands()) {
    if (b.name == name) return b;
  }
  Fail(ErrorCode::kCatalog, "unknown band '" + std::string(name) + "'");
}

std::string FeatureName(const FeatureDescriptor& d) {
  std::string out = d.channel + "|" + d.measure;
  if (d.band) {
    out += "|" + d.band->name;
    if (d.denominator) out += "/" + d.denominator->name;
  }
  if (!d.window.empty()) out += "@" + d.window;
  return out;
}

FeatureDescriptor ParseFeatureName(std::string_view name) {
  auto bad = [&](const std::string& why) -> FeatureDescriptor {
    Fail(ErrorCode::kCatalog, "feature name '" + std::string(name) + "': " + why);
  };
  std::string_view rest = name;
  std::string window;
  if (const auto at = rest.rfind('@'); at != std::string_view::npos) {
    window = std::string(rest.substr(at + 1));
    rest = rest.substr(0, at);
    if (window != "h1" && window != "h2") return bad("unknown window");
  }
  std::vector<std::string_view> parts;
  while (true) {
    const auto bar = rest.find('|');
    parts.push_back(rest.substr(0, bar));
    if (bar == std::string_view::npos) break;
    rest = rest.substr(bar + 1);
  }
  if (parts.size() < 2 || parts.size() > 3) return bad("expected 2 or 3 fields");
  const MeasureInfo* info = FindMeasure(parts[1]);
  if (info == nullptr) return bad("unknown measure");
  std::optional<std::string_view> band, denominator;
  if (parts.size() == 3) {
    const auto slash = parts[2].find('/');
    band = parts[2].substr(0, slash);
    if (slash != std::string_view::npos) denominator = parts[2].substr(slash + 1);
  }
  const int n_bands = (band ? 1 : 0) + (denominator ? 1 : 0);
  if (n_bands != info->bands) return bad("band count does not match measure");
  FeatureDescriptor d =
      Make(std::string(parts[0]), parts[1], band, denominator, window);
  if (d.name != name) return bad("not in canonical form");
  return d;
}

std::vector<std::string> FeatureMatrix::names() const {
  std::vector<std::string> out;
  out.reserve(descriptors.size());
  for (const auto& d : descriptors) out.push_back(d.name);
  return out;
}

Catalog CatalogFromName(std::string_view name) {
  const std::string n = Upper(name);
  if (n == "SHORT" || n == "FEATSHORT") return Catalog::kShort;
  if (n == "LONG" || n == "FEATLONG") return Catalog::kLong;
  Fail(ErrorCode::kUsage, "unknown catalog '" + std::string(name) + "'");
}

std::string_view CatalogName(Catalog catalog) {
  return catalog == Catalog::kShort ? "FeatShort" : "FeatLong";
}

std::vector<FeatureDescriptor> ShortCatalog(
    const std::vector<std::string>& channel_names) {
  std::vector<FeatureDescriptor> out;
  for (const auto& [name, role] : RecognizedChannels(channel_names)) {
    AppendShort(name, role, out);
  }
  return out;
}

std::vector<FeatureDescriptor> LongCatalog(
    const std::vector<std::string>& channel_names) {
  std::vector<FeatureDescriptor> out;
  for (const auto& [name, role] : RecognizedChannels(channel_names)) {
    for (std::string_view w : {"", "h1", "h2"}) AppendLong(name, w, out);
  }
  return out;
}

namespace {
std::vector<std::string> ChannelNames(const EpochedRecord& record) {
  std::vector<std::string> names;
  for (const auto& c : record.channels) names.push_back(c.name);
  return names;
}
}  // namespace

FeatureMatrix ExtractFeatShort(const EpochedRecord& record,
                               const SpectralOptions& options) {
  return Extract(record, ShortCatalog(ChannelNames(record)), options);
}

FeatureMatrix ExtractFeatLong(const EpochedRecord& record,
                              const SpectralOptions& options) {
  return Extract(record, LongCatalog(ChannelNames(record)), options);
}

FeatureMatrix ExtractFeatures(const EpochedRecord& record, Catalog catalog,
                              const SpectralOptions& options) {
  return catalog == Catalog::kShort ? ExtractFeatShort(record, options)
                                    : ExtractFeatLong(record, options);
}

FeatureMatrix ConcatRows(const std::vector<const FeatureMatrix*>& parts) {
  FeatureMatrix out;
  if (parts.empty()) return out;
  out.descriptors = parts.front()->descriptors;
  Eigen::Index rows = 0;
  bool labeled = true;
  for (const FeatureMatrix* p : parts) {
    if (p->descriptors.size() != out.descriptors.size()) {
      Fail(ErrorCode::kDimension, "feature matrices have different catalogs");
    }
    for (std::size_t j = 0; j < out.descriptors.size(); ++j) {
      if (p->descriptors[j].name != out.descriptors[j].name) {
        Fail(ErrorCode::kDimension, "feature column " + std::to_string(j) +
                                        " differs: '" + p->descriptors[j].name +
                                        "' vs '" + out.descriptors[j].name + "'");
      }
    }
    rows += p->rows();
    labeled = labeled && p->labels.has_value();
  }
  out.values.resize(rows, static_cast<Eigen::Index>(out.descriptors.size()));
  std::vector<SleepStage> labels;
  Eigen::Index r = 0;
  for (const FeatureMatrix* p : parts) {
    out.values.middleRows(r, p->rows()) = p->values;
    r += p->rows();
    if (labeled) labels.insert(labels.end(), p->labels->begin(), p->labels->end());
  }
  if (labeled) out.labels = std::move(labels);
  return out;
}

FeatureMatrix SelectColumns(const FeatureMatrix& fm,
                            const std::vector<std::size_t>& columns) {
  FeatureMatrix out;
  out.labels = fm.labels;
  out.values.resize(fm.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k] >= fm.descriptors.size()) {
      Fail(ErrorCode::kDimension, "column index " + std::to_string(columns[k]) +
                                      " out of range");
    }
    out.descriptors.push_back(fm.descriptors[columns[k]]);
    out.values.col(static_cast<Eigen::Index>(k)) =
        fm.values.col(static_cast<Eigen::Index>(columns[k]));
  }
  return out;
}

}  // namespace nisleep
