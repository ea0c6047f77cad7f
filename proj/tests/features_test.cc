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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "nisleep/error.h"
#include "nisleep/features.h"
#include "nisleep/psg.h"
#include "nisleep/select.h"
#include "nisleep/spectral.h"
#include "nisleep/synthetic.h"
#include "oracles.h"

namespace nisleep {
namespace {

using ::nisleep::testing::AnovaOracle;

std::vector<double> Sine(double hz, double fs, std::size_t n, double amplitude = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amplitude * std::sin(2 * std::numbers::pi * hz * static_cast<double>(i) / fs);
  }
  return x;
}

std::vector<double> Noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (double& v : x) v = g(rng);
  return x;
}

EpochedRecord SingleEpoch(const std::vector<std::string>& channels,
                          const std::vector<std::vector<double>>& signals, double fs) {
  EpochedRecord r;
  r.subject_id = "T";
  Epoch e;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    r.channels.push_back({channels[c], fs, signals[c].size()});
    e.windows.emplace_back(signals[c].begin(), signals[c].end());
  }
  e.label = SleepStage::kW;
  r.epochs.push_back(std::move(e));
  return r;
}

TEST(SpectralTest, SinusoidPeaksAtItsFrequency) {
  const Spectrum s = WelchPsd(Sine(10, 100, 3000), 100, 2.0, 0.5);
  const auto peak = std::max_element(s.density.begin(), s.density.end()) - s.density.begin();
  EXPECT_DOUBLE_EQ(s.freqs[peak], 10.0);
}

TEST(SpectralTest, WhiteNoiseIntegratesToVariance) {
  const auto x = Noise(30000, 3);
  const Spectrum s = WelchPsd(x, 100, 5.0, 0.5);
  double total = 0;
  for (double d : s.density) total += d * s.df();
  const double var = PopulationStd(x) * PopulationStd(x);
  EXPECT_NEAR(total / var, 1.0, 0.05);
}

TEST(SpectralTest, ConstantSignalHasZeroDensity) {
  const Spectrum s = WelchPsd(std::vector<double>(3000, 4.2), 100);
  for (double d : s.density) EXPECT_NEAR(d, 0.0, 1e-20);
}

TEST(SpectralTest, ShortSignalIsSpectralError) {
  try {
    WelchPsd(std::vector<double>(100, 0.0), 100, 5.0, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSpectral);
  }
}

TEST(SpectralTest, TwoHertzSineIsAllDelta) {
  const Spectrum s = WelchPsd(Sine(2, 100, 3000), 100);
  EXPECT_NEAR(BandPower(s, StandardBand("delta"), true), 1.0, 0.02);
  EXPECT_LE(BandPower(s, StandardBand("beta"), true), 0.02);
}

TEST(SpectralTest, DisjointPartitionSumsToOne) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Spectrum s = WelchPsd(Noise(3000, seed), 100);
    const std::vector<BandDefinition> partition = {
        {"a", 0.5, 4}, {"b", 4, 8}, {"c", 8, 12}, {"d", 12, 16}, {"e", 16, s.nyquist()}};
    double sum = 0;
    for (const auto& b : partition) sum += BandPower(s, b, true);
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(SpectralTest, BandBeyondNyquistIsBandError) {
  const Spectrum s = WelchPsd(Noise(3000, 1), 100);
  try {
    BandPower(s, {"x", 60, 70}, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBand);
  }
}

TEST(HjorthTest, SinusoidMobilityMatchesClosedForm) {
  for (double omega : {0.1, 0.3, 0.7}) {
    std::vector<double> x(20000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(omega * static_cast<double>(i));
    EXPECT_NEAR(Hjorth(x).mobility, 2 * std::sin(omega / 2), 1e-3);
  }
}

TEST(HjorthTest, NoiseComplexityExceedsOne) {
  EXPECT_GT(Hjorth(Noise(5000, 9)).complexity, 1.0);
}

TEST(HjorthTest, ConstantSignalIsSentinel) {
  const HjorthParameters h = Hjorth(std::vector<double>(100, 3.0));
  EXPECT_EQ(h.activity, 0.0);
  EXPECT_EQ(h.mobility, 0.0);
  EXPECT_EQ(h.complexity, 0.0);
}

TEST(CatalogTest, PublishedShortCatalogSizes) {
  EXPECT_EQ(ShortCatalog(IsrucLikeChannels()).size(), 87u);
  EXPECT_EQ(ShortCatalog(PhysionetLikeChannels()).size(), 38u);
}

TEST(CatalogTest, LongCatalogIsUniformPerChannel) {
  const auto names = PhysionetLikeChannels();
  const auto all = LongCatalog(names);
  ASSERT_EQ(all.size() % names.size(), 0u);
  for (const auto& ch : names) {
    const auto n = std::count_if(all.begin(), all.end(),
                                 [&](const FeatureDescriptor& d) { return d.channel == ch; });
    EXPECT_EQ(static_cast<std::size_t>(n), all.size() / names.size());
  }
}

TEST(CatalogTest, NamesAreUniqueAndParseBack) {
  for (const auto& catalog : {ShortCatalog(IsrucLikeChannels()), LongCatalog(IsrucLikeChannels())}) {
    std::set<std::string> seen;
    for (const auto& d : catalog) {
      EXPECT_TRUE(seen.insert(d.name).second) << d.name;
      const FeatureDescriptor back = ParseFeatureName(d.name);
      EXPECT_EQ(back.name, d.name);
      EXPECT_EQ(back.kind, d.kind);
      EXPECT_EQ(back.channel, d.channel);
      EXPECT_EQ(back.band.has_value(), d.band.has_value());
      if (d.band) {
        EXPECT_EQ(back.band->name, d.band->name);
      }
    }
  }
  EXPECT_THROW(ParseFeatureName("EEG|nonsense"), Error);
  EXPECT_THROW(ParseFeatureName("EEG|relpow"), Error);
}

TEST(CatalogTest, UnrecognizedChannelsAreCatalogError) {
  try {
    ShortCatalog({"Pulse", "SpO2"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCatalog);
  }
}

TEST(FeaturesTest, OneHertzEegIsDeltaDominated) {
  const auto r = SingleEpoch({"EEG Fpz-Cz"}, {Sine(1, 100, 3000, 20)}, 100);
  const FeatureMatrix fm = ExtractFeatShort(r);
  const auto names = fm.names();
  const auto col = std::find(names.begin(), names.end(), "EEG Fpz-Cz|relpow|delta") - names.begin();
  ASSERT_LT(static_cast<std::size_t>(col), names.size());
  EXPECT_NEAR(fm.values(0, col), 1.0, 0.02);
}

TEST(FeaturesTest, ConstantEpochStatisticalBlock) {
  const double c = 2.5;
  const std::size_t n = 3000;
  const auto r = SingleEpoch({"EEG Fpz-Cz"}, {std::vector<double>(n, c)}, 100);
  const FeatureMatrix fm = ExtractFeatLong(r);
  auto value = [&](const std::string& measure) {
    const auto names = fm.names();
    const auto it = std::find(names.begin(), names.end(), "EEG Fpz-Cz|" + measure);
    EXPECT_NE(it, names.end()) << measure;
    return fm.values(0, it - names.begin());
  };
  EXPECT_NEAR(value("mean"), c, 1e-6);
  EXPECT_EQ(value("std"), 0.0);
  EXPECT_EQ(value("skew"), 0.0);
  EXPECT_EQ(value("kurt"), 0.0);
  EXPECT_EQ(value("iqr"), 0.0);
  EXPECT_EQ(value("zero_cross"), 0.0);
  EXPECT_NEAR(value("abs_energy"), c * c * n, 1e-6 * c * c * n);
  EXPECT_EQ(value("spec_entropy"), 0.0);
  EXPECT_TRUE(fm.values.allFinite());
}

TEST(FeaturesTest, DeterministicAndIdenticalEpochsGiveIdenticalRows) {
  const auto x = Noise(3000, 5);
  auto r = SingleEpoch({"EEG Fpz-Cz", "EMG submental"}, {x, x}, 100);
  r.epochs.push_back(r.epochs[0]);
  const FeatureMatrix a = ExtractFeatLong(r);
  const FeatureMatrix b = ExtractFeatLong(r);
  EXPECT_TRUE((a.values.array() == b.values.array()).all());
  EXPECT_TRUE((a.values.row(0).array() == a.values.row(1).array()).all());
}

TEST(FeaturesTest, ScaleCovariance) {
  const auto x = Noise(3000, 21);
  std::vector<double> scaled = x;
  const double c = 3.7;
  for (double& v : scaled) v *= c;
  const FeatureMatrix a = ExtractFeatLong(SingleEpoch({"EEG C3-A2"}, {x}, 100));
  const FeatureMatrix b = ExtractFeatLong(SingleEpoch({"EEG C3-A2"}, {scaled}, 100));
  const FeatureMatrix sa = ExtractFeatShort(SingleEpoch({"EEG C3-A2"}, {x}, 100));
  const FeatureMatrix sb = ExtractFeatShort(SingleEpoch({"EEG C3-A2"}, {scaled}, 100));
  // Samples are stored as float, so scaled inputs carry their own rounding.
  constexpr double kTol = 1e-5;
  auto check = [&](const FeatureMatrix& lhs, const FeatureMatrix& rhs) {
    for (Eigen::Index j = 0; j < lhs.cols(); ++j) {
      const std::string& m = lhs.descriptors[j].measure;
      const double u = lhs.values(0, j);
      const double v = rhs.values(0, j);
      if (m == "relpow" || m == "hj_mobility" || m == "hj_complexity" || m == "skew" ||
          m == "kurt" || m == "ratio") {
        EXPECT_NEAR(v, u, kTol * std::max(1.0, std::abs(u))) << lhs.descriptors[j].name;
      } else if (m == "rms" || m == "band_rms" || m == "std") {
        EXPECT_NEAR(v, c * u, kTol * c * std::abs(u)) << lhs.descriptors[j].name;
      } else if (m == "hj_activity") {
        EXPECT_NEAR(v, c * c * u, kTol * c * c * u) << lhs.descriptors[j].name;
      }
    }
  };
  check(a, b);
  check(sa, sb);
}

TEST(FeaturesTest, NoEpochsIsDataError) {
  EpochedRecord r = SingleEpoch({"EEG Fpz-Cz"}, {Noise(3000, 1)}, 100);
  r.epochs.clear();
  EXPECT_THROW(ExtractFeatShort(r), Error);
}

std::vector<SleepStage> Labels(const std::vector<int>& groups) {
  std::vector<SleepStage> out;
  for (int g : groups) out.push_back(StageFromIndex(static_cast<std::size_t>(g)));
  return out;
}

TEST(AnovaTest, ClosedFormExamples) {
  const std::vector<double> x = {1, 2, 3, 2, 3, 4, 4, 5, 6};
  const std::vector<int> g = {0, 0, 0, 1, 1, 1, 2, 2, 2};
  EXPECT_NEAR(AnovaF(x, Labels(g)), AnovaOracle(x, g), 1e-10);
  EXPECT_NEAR(AnovaF(x, Labels(g)), 7.0, 1e-10);
  EXPECT_EQ(AnovaF(std::vector<double>{1, 2, 1, 2}, Labels({0, 0, 1, 1})), 0.0);
  EXPECT_EQ(AnovaF(std::vector<double>{0, 0, 0, 1, 1, 1}, Labels({0, 0, 0, 1, 1, 1})),
            kMaximalFScore);
}

TEST(AnovaTest, SingleGroupIsSelectionError) {
  try {
    AnovaF(std::vector<double>{1, 2, 3}, Labels({2, 2, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSelection);
  }
}

TEST(AnovaTest, MatchesOracleOnRandomInstances) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 6 + static_cast<int>(rng() % 60);
    std::vector<double> x(n);
    std::vector<int> g(n);
    std::normal_distribution<double> dist(0, 1 + trial % 5);
    for (int i = 0; i < n; ++i) {
      g[i] = i < 5 ? i : static_cast<int>(rng() % 5);
      x[i] = dist(rng) + g[i] * 0.3;
    }
    const double expected = AnovaOracle(x, g);
    EXPECT_NEAR(AnovaF(x, Labels(g)), expected, 1e-10 * std::max(1.0, expected));
  }
}

TEST(AnovaTest, WithinGroupShuffleInvariance) {
  std::mt19937_64 rng(4);
  std::vector<double> x(40);
  std::vector<int> g(40);
  for (int i = 0; i < 40; ++i) {
    g[i] = i % 4;
    x[i] = std::normal_distribution<double>(g[i], 1.0)(rng);
  }
  const double f = AnovaF(x, Labels(g));
  // Permute values among members of each group.
  for (int k = 0; k < 4; ++k) {
    std::vector<double> vals;
    for (int i = k; i < 40; i += 4) vals.push_back(x[i]);
    std::shuffle(vals.begin(), vals.end(), rng);
    for (int i = k, j = 0; i < 40; i += 4, ++j) x[i] = vals[j];
  }
  EXPECT_NEAR(AnovaF(x, Labels(g)), f, 1e-12 * std::max(1.0, f));
}

TEST(SelectTest, PublishedKeepCounts) {
  EXPECT_EQ(KeepCount(0.10, 2488), 249u);
  EXPECT_EQ(KeepCount(0.10, 1048), 105u);
  EXPECT_EQ(KeepCount(0.90, 87), 78u);
  EXPECT_EQ(KeepCount(0.90, 38), 34u);
  EXPECT_EQ(KeepCount(0.01, 10), 1u);
  EXPECT_EQ(KeepCount(1.0, 10), 10u);
}

FeatureMatrix RandomLabeled(int n, int p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  FeatureMatrix fm;
  fm.values.resize(n, p);
  std::vector<SleepStage> labels;
  for (int i = 0; i < n; ++i) labels.push_back(StageFromIndex(i % 5));
  for (int j = 0; j < p; ++j) {
    FeatureDescriptor d;
    d.channel = "EEG";
    d.measure = "mean";
    d.name = "f" + std::to_string(j);
    fm.descriptors.push_back(d);
    const double effect = (j % 3) * 0.5;
    for (int i = 0; i < n; ++i) fm.values(i, j) = g(rng) + effect * (i % 5);
  }
  fm.labels = labels;
  return fm;
}

TEST(SelectTest, KeepsTopScoresInOriginalOrder) {
  const FeatureMatrix fm = RandomLabeled(100, 20, 2);
  const auto [mask, reduced] = SelectTopFraction(fm, 0.3);
  ASSERT_EQ(mask.kept_indices.size(), 6u);
  EXPECT_TRUE(std::is_sorted(mask.kept_indices.begin(), mask.kept_indices.end()));
  std::vector<double> kept_scores;
  double min_kept = kMaximalFScore;
  for (std::size_t j : mask.kept_indices) min_kept = std::min(min_kept, mask.f_scores[j]);
  for (std::size_t j = 0; j < 20; ++j) {
    const bool kept = std::count(mask.kept_indices.begin(), mask.kept_indices.end(), j) > 0;
    if (!kept) {
      EXPECT_LE(mask.f_scores[j], min_kept);
    }
    std::vector<double> col(fm.values.col(j).data(), fm.values.col(j).data() + 100);
    EXPECT_NEAR(mask.f_scores[j], AnovaF(col, *fm.labels), 1e-12);
  }
  for (std::size_t k = 0; k < mask.kept_indices.size(); ++k) {
    EXPECT_TRUE((reduced.values.col(k).array() == fm.values.col(mask.kept_indices[k]).array()).all());
  }
}

TEST(SelectTest, MonotoneInFraction) {
  const FeatureMatrix fm = RandomLabeled(60, 25, 8);
  std::vector<std::size_t> previous;
  for (double f = 0.04; f <= 1.0001; f += 0.04) {
    const auto mask = SelectTopFraction(fm, std::min(f, 1.0)).first;
    for (std::size_t j : previous) {
      EXPECT_TRUE(std::binary_search(mask.kept_indices.begin(), mask.kept_indices.end(), j));
    }
    previous = mask.kept_indices;
  }
}

TEST(SelectTest, TiesBrokenByColumnIndex) {
  FeatureMatrix fm = RandomLabeled(50, 4, 3);
  for (int i = 0; i < 50; ++i) fm.values(i, 0) += 10.0 * (i % 5);
  fm.values.col(2) = fm.values.col(0);
  fm.values.col(3) = fm.values.col(0);
  const auto mask = SelectTopFraction(fm, 0.5).first;
  EXPECT_EQ(mask.f_scores[0], mask.f_scores[3]);
  EXPECT_EQ(mask.kept_indices, (std::vector<std::size_t>{0, 2}));
}

TEST(SelectTest, MaskJsonRoundTripAndApply) {
  const FeatureMatrix fm = RandomLabeled(40, 10, 5);
  const auto [mask, reduced] = SelectTopFraction(fm, 0.5);
  const SelectionMask back = SelectionMaskFromJson(SelectionMaskToJson(mask));
  EXPECT_EQ(back.kept_indices, mask.kept_indices);
  EXPECT_EQ(back.f_scores, mask.f_scores);
  EXPECT_EQ(back.descriptor_names, mask.descriptor_names);
  const FeatureMatrix applied = ApplyMask(fm, back);
  EXPECT_TRUE((applied.values.array() == reduced.values.array()).all());
}

TEST(SelectTest, BadFractionAndMissingLabels) {
  FeatureMatrix fm = RandomLabeled(20, 3, 1);
  EXPECT_THROW(SelectTopFraction(fm, 0.0), Error);
  EXPECT_THROW(SelectTopFraction(fm, 1.5), Error);
  fm.labels.reset();
  EXPECT_THROW(SelectTopFraction(fm, 0.5), Error);
}

}  // namespace
}  // namespace nisleep
