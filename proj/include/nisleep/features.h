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

// Per-epoch feature catalogs.
//
// Two catalogs are provided. The short catalog is built from clinically
// scored quantities: relative power in the slow, delta, theta, alpha, sigma
// and beta bands, band-limited amplitudes and slowing ratios for EEG/EOG, and
// tone measures for chin EMG. The long catalog is an exhaustive
// statistical/spectral grid evaluated on the whole epoch and on each half.
//
// Every feature name is generated from its descriptor with the grammar
//
//   <channel>|<measure>[|<band>[/<denominator band>]][@<window>]
//
// and ParseFeatureName inverts it.

#ifndef NISLEEP_FEATURES_H_
#define NISLEEP_FEATURES_H_

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nisleep/psg.h"
#include "nisleep/spectral.h"
#include "nisleep/stage.h"

namespace nisleep {

enum class FeatureKind {
  kBandPowerAbs,
  kBandPowerRel,
  kHjorth,
  kStatistical,
  kEntropy,
  kRatio,
};

std::string_view FeatureKindName(FeatureKind kind);

enum class ChannelRole { kEeg, kEog, kEmg, kOther };

// Name-based role lookup covering the ISRUC and Sleep-EDF montages
// ("F3-A2", "ROC-A1", "Chin-EMG", "EEG Fpz-Cz", "EOG horizontal", ...).
ChannelRole ResolveChannelRole(std::string_view channel_name);

// slow 0.5-2, delta 0.5-4, theta 4-8, alpha 8-12, sigma 12-16, beta 8-20 Hz.
// Beta deliberately overlaps alpha and sigma.
const std::vector<BandDefinition>& StandardBands();
const BandDefinition& StandardBand(std::string_view name);

struct FeatureDescriptor {
  std::string name;
  std::string channel;
  FeatureKind kind = FeatureKind::kStatistical;
  // Measure token, e.g. "relpow", "band_rms", "skew", "hj_mobility".
  std::string measure;
  std::optional<BandDefinition> band;
  // Denominator band, ratios only.
  std::optional<BandDefinition> denominator;
  // "" for the whole epoch, "h1" / "h2" for its halves.
  std::string window;
};

std::string FeatureName(const FeatureDescriptor& d);
// Throws kCatalog on names outside the grammar.
FeatureDescriptor ParseFeatureName(std::string_view name);

struct FeatureMatrix {
  std::vector<FeatureDescriptor> descriptors;
  Eigen::MatrixXd values;  // n_epochs x p, columns in descriptor order
  std::optional<std::vector<SleepStage>> labels;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  std::vector<std::string> names() const;
};

enum class Catalog { kShort, kLong };
Catalog CatalogFromName(std::string_view name);
std::string_view CatalogName(Catalog catalog);

struct SpectralOptions {
  double window_s = 5.0;
  double overlap = 0.5;
};

// Descriptor list for a channel set. Pure function of the channel names;
// channels with no recognizable role are skipped. Throws kCatalog if none
// remain.
std::vector<FeatureDescriptor> ShortCatalog(
    const std::vector<std::string>& channel_names);
std::vector<FeatureDescriptor> LongCatalog(
    const std::vector<std::string>& channel_names);

FeatureMatrix ExtractFeatShort(const EpochedRecord& record,
                               const SpectralOptions& options = {});
FeatureMatrix ExtractFeatLong(const EpochedRecord& record,
                              const SpectralOptions& options = {});
FeatureMatrix ExtractFeatures(const EpochedRecord& record, Catalog catalog,
                              const SpectralOptions& options = {});

// Row-wise concatenation; descriptor lists must agree.
FeatureMatrix ConcatRows(const std::vector<const FeatureMatrix*>& parts);

// Keeps the given columns, in the given order.
FeatureMatrix SelectColumns(const FeatureMatrix& fm,
                            const std::vector<std::size_t>& columns);

}  // namespace nisleep

#endif  // NISLEEP_FEATURES_H_
