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

#include "nisleep/spectral.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "nisleep/error.h"

namespace nisleep {

namespace {

// FFTW planning is not thread-safe; executing an existing plan on new arrays
// is. Plans are created once per transform length and kept for the process.
class PlanCache {
 public:
  fftw_plan Get(int n) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    std::vector<double> in(static_cast<std::size_t>(n));
    std::vector<fftw_complex> out(static_cast<std::size_t>(n / 2 + 1));
    fftw_plan plan = fftw_plan_dft_r2c_1d(
        n, in.data(), out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(n, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [n, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mu_;
  std::map<int, fftw_plan> plans_;
};

PlanCache& Plans() {
  static PlanCache* cache = new PlanCache();
  return *cache;
}

double Interp(const Spectrum& s, std::size_t i, double f) {
  const double f0 = s.freqs[i];
  const double f1 = s.freqs[i + 1];
  const double t = (f - f0) / (f1 - f0);
  return s.density[i] + t * (s.density[i + 1] - s.density[i]);
}

double Integrate(const Spectrum& s, double lo, double hi) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < s.freqs.size(); ++i) {
    const double a = std::max(lo, s.freqs[i]);
    const double b = std::min(hi, s.freqs[i + 1]);
    if (a >= b) continue;
    total += 0.5 * (b - a) * (Interp(s, i, a) + Interp(s, i, b));
  }
  return total;
}

// Bin range [first, last) with frequencies in [0.5 Hz, Nyquist].
std::pair<std::size_t, std::size_t> AnalysisBins(const Spectrum& s) {
  std::size_t first = 0;
  while (first < s.freqs.size() && s.freqs[first] < kAnalysisLowHz) ++first;
  return {first, s.freqs.size()};
}

}  // namespace

Spectrum WelchPsd(std::span<const double> signal, double sampling_hz,
                  double window_s, double overlap) {
  if (!(sampling_hz > 0) || !(window_s > 0)) {
    Fail(ErrorCode::kSpectral, "sampling rate and window must be positive");
  }
  if (!(overlap >= 0.0 && overlap < 1.0)) {
    Fail(ErrorCode::kSpectral, "overlap must lie in [0, 1)");
  }
  const auto nperseg =
      static_cast<std::size_t>(std::llround(window_s * sampling_hz));
  if (nperseg < 2 || signal.size() < nperseg) {
    Fail(ErrorCode::kSpectral,
         "signal of " + std::to_string(signal.size()) +
             " samples is shorter than one " + std::to_string(nperseg) +
             "-sample window");
  }
  const std::size_t noverlap = static_cast<std::size_t>(
      std::floor(overlap * static_cast<double>(nperseg)));
  const std::size_t step = nperseg - noverlap;
  const std::size_t n_segments = 1 + (signal.size() - nperseg) / step;

  std::vector<double> window(nperseg);
  double window_power = 0.0;
  for (std::size_t i = 0; i < nperseg; ++i) {
    // Periodic Hann.
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                     static_cast<double>(i) /
                                     static_cast<double>(nperseg));
    window_power += window[i] * window[i];
  }

  const std::size_t n_bins = nperseg / 2 + 1;
  fftw_plan plan = Plans().Get(static_cast<int>(nperseg));
  std::vector<double> buf(nperseg);
  std::vector<fftw_complex> spec(n_bins);
  std::vector<double> acc(n_bins, 0.0);

  for (std::size_t s = 0; s < n_segments; ++s) {
    const auto seg = signal.subspan(s * step, nperseg);
    double mean = 0.0;
    for (double v : seg) mean += v;
    mean /= static_cast<double>(nperseg);
    for (std::size_t i = 0; i < nperseg; ++i) {
      buf[i] = (seg[i] - mean) * window[i];
    }
    fftw_execute_dft_r2c(plan, buf.data(), spec.data());
    for (std::size_t k = 0; k < n_bins; ++k) {
      acc[k] += spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
    }
  }

  Spectrum out;
  out.sampling_hz = sampling_hz;
  out.freqs.resize(n_bins);
  out.density.resize(n_bins);
  const double scale =
      1.0 / (sampling_hz * window_power * static_cast<double>(n_segments));
  for (std::size_t k = 0; k < n_bins; ++k) {
    out.freqs[k] = static_cast<double>(k) * sampling_hz /
                   static_cast<double>(nperseg);
    const bool unpaired = k == 0 || (nperseg % 2 == 0 && k == n_bins - 1);
    out.density[k] = acc[k] * scale * (unpaired ? 1.0 : 2.0);
  }
  return out;
}

double BandPower(const Spectrum& spectrum, const BandDefinition& band,
                 bool relative) {
  if (spectrum.freqs.size() < 2) {
    Fail(ErrorCode::kBand, "spectrum has fewer than two bins");
  }
  if (!(band.lo_hz >= 0.0) || !(band.lo_hz < band.hi_hz) ||
      band.hi_hz > spectrum.freqs.back() + 1e-12) {
    Fail(ErrorCode::kBand, "band '" + band.name + "' [" +
                               std::to_string(band.lo_hz) + ", " +
                               std::to_string(band.hi_hz) +
                               "] Hz covers no analyzable bins");
  }
  const double power = Integrate(spectrum, band.lo_hz, band.hi_hz);
  if (!relative) return power;
  const double total =
      Integrate(spectrum, kAnalysisLowHz, spectrum.freqs.back());
  return total > 0.0 ? power / total : 0.0;
}

double Mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

namespace {

// Central moments m2, m3, m4.
struct Moments {
  double m2 = 0, m3 = 0, m4 = 0;
};

Moments CentralMoments(std::span<const double> x) {
  Moments m;
  if (x.empty()) return m;
  const double mu = Mean(x);
  for (double v : x) {
    const double d = v - mu;
    const double d2 = d * d;
    m.m2 += d2;
    m.m3 += d2 * d;
    m.m4 += d2 * d2;
  }
  const auto n = static_cast<double>(x.size());
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  return m;
}

// Variances below this fraction of the mean square are numerically constant.
bool Degenerate(double var, std::span<const double> x) {
  double ms = 0.0;
  for (double v : x) ms += v * v;
  ms /= std::max<double>(1.0, static_cast<double>(x.size()));
  return var <= 1e-24 * std::max(ms, 1e-300) || var == 0.0;
}

double Variance(std::span<const double> x) { return CentralMoments(x).m2; }

}  // namespace

double PopulationStd(std::span<const double> x) {
  const double var = Variance(x);
  return Degenerate(var, x) ? 0.0 : std::sqrt(var);
}

double Skewness(std::span<const double> x) {
  const Moments m = CentralMoments(x);
  if (Degenerate(m.m2, x)) return 0.0;
  return m.m3 / std::pow(m.m2, 1.5);
}

double ExcessKurtosis(std::span<const double> x) {
  const Moments m = CentralMoments(x);
  if (Degenerate(m.m2, x)) return 0.0;
  return m.m4 / (m.m2 * m.m2) - 3.0;
}

double Quantile(std::span<const double> x, double q) {
  if (x.empty()) return 0.0;
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  const double t = pos - static_cast<double>(lo);
  return s[lo] + t * (s[hi] - s[lo]);
}

std::size_t ZeroCrossings(std::span<const double> x) {
  std::size_t n = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if ((x[i - 1] < 0.0 && x[i] > 0.0) || (x[i - 1] > 0.0 && x[i] < 0.0)) ++n;
  }
  return n;
}

double AbsEnergy(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

double Rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::sqrt(AbsEnergy(x) / static_cast<double>(x.size()));
}

HjorthParameters Hjorth(std::span<const double> signal) {
  if (signal.size() < 3) {
    Fail(ErrorCode::kData, "Hjorth parameters need at least 3 samples");
  }
  std::vector<double> d1(signal.size() - 1);
  for (std::size_t i = 1; i < signal.size(); ++i) {
    d1[i - 1] = signal[i] - signal[i - 1];
  }
  std::vector<double> d2(d1.size() - 1);
  for (std::size_t i = 1; i < d1.size(); ++i) d2[i - 1] = d1[i] - d1[i - 1];

  const double v0 = Variance(signal);
  if (Degenerate(v0, signal)) return {};
  const double v1 = Variance(d1);
  const double v2 = Variance(d2);
  HjorthParameters h;
  h.activity = v0;
  h.mobility = std::sqrt(v1 / v0);
  if (v1 > 0.0 && h.mobility > 0.0) {
    h.complexity = std::sqrt(v2 / v1) / h.mobility;
  }
  return h;
}

double SpectralEntropy(const Spectrum& spectrum) {
  const auto [first, last] = AnalysisBins(spectrum);
  if (last - first < 2) return 0.0;
  double total = 0.0;
  for (std::size_t k = first; k < last; ++k) total += spectrum.density[k];
  if (!(total > 0.0)) return 0.0;
  double h = 0.0;
  for (std::size_t k = first; k < last; ++k) {
    const double p = spectrum.density[k] / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  return h / std::log(static_cast<double>(last - first));
}

double MedianFrequency(const Spectrum& spectrum) {
  const auto [first, last] = AnalysisBins(spectrum);
  double total = 0.0;
  for (std::size_t k = first; k < last; ++k) total += spectrum.density[k];
  if (!(total > 0.0)) return 0.0;
  double cum = 0.0;
  for (std::size_t k = first; k < last; ++k) {
    cum += spectrum.density[k];
    if (cum >= 0.5 * total) return spectrum.freqs[k];
  }
  return spectrum.freqs[last - 1];
}

}  // namespace nisleep
