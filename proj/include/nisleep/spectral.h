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

// Spectral and time-domain signal primitives used by the feature catalogs.

#ifndef NISLEEP_SPECTRAL_H_
#define NISLEEP_SPECTRAL_H_

#include <span>
#include <string>
#include <vector>

namespace nisleep {

struct BandDefinition {
  std::string name;
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

// One-sided power spectral density.
struct Spectrum {
  std::vector<double> freqs;    // 0, df, 2 df, ..., fs/2 (or below)
  std::vector<double> density;  // power per Hz
  double sampling_hz = 0.0;

  double df() const { return freqs.size() > 1 ? freqs[1] - freqs[0] : 0.0; }
  double nyquist() const { return sampling_hz / 2.0; }
};

// Welch estimate: Hann-windowed, per-segment mean-removed periodograms
// averaged over segments of window_s seconds overlapping by `overlap`.
// Scaled so that sum(density) * df equals the mean windowed power
// sum((w x)^2) / sum(w^2) of the segments.
Spectrum WelchPsd(std::span<const double> signal, double sampling_hz,
                  double window_s = 5.0, double overlap = 0.5);

// Lower edge of the range used as the denominator of relative band power.
inline constexpr double kAnalysisLowHz = 0.5;

// Integral of the density over [band.lo_hz, band.hi_hz] by the trapezoid rule
// on the piecewise-linear interpolant, so adjacent bands add up exactly. With
// `relative`, divided by the integral over [0.5 Hz, Nyquist] (0 if that is 0).
double BandPower(const Spectrum& spectrum, const BandDefinition& band,
                 bool relative);

struct HjorthParameters {
  double activity = 0.0;
  double mobility = 0.0;
  double complexity = 0.0;
};

// First differences stand in for derivatives. A zero-variance signal yields
// (0, 0, 0).
HjorthParameters Hjorth(std::span<const double> signal);

// Population moments; zero-variance inputs give skewness = kurtosis = 0.
double Mean(std::span<const double> x);
double PopulationStd(std::span<const double> x);
double Skewness(std::span<const double> x);
double ExcessKurtosis(std::span<const double> x);
// Linear-interpolation quantile, q in [0, 1].
double Quantile(std::span<const double> x, double q);
std::size_t ZeroCrossings(std::span<const double> x);
double AbsEnergy(std::span<const double> x);
double Rms(std::span<const double> x);

// Normalized Shannon entropy of the density over [0.5 Hz, Nyquist], in [0, 1].
double SpectralEntropy(const Spectrum& spectrum);
// Frequency splitting the [0.5 Hz, Nyquist] power in half.
double MedianFrequency(const Spectrum& spectrum);

}  // namespace nisleep

#endif  // NISLEEP_SPECTRAL_H_
