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

#include "nisleep/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "nisleep/binary_io.h"
#include "nisleep/error.h"
#include "nisleep/features.h"

namespace nisleep {

namespace {

constexpr double kEpochSeconds = 30.0;
constexpr double kAmplitudeUv = 50.0;

struct FrequencyRange {
  double lo;
  double hi;
};

FrequencyRange DominantRange(SleepStage s) {
  switch (s) {
    case SleepStage::kW:
      return {9.0, 11.0};
    case SleepStage::kN1:
      return {5.0, 7.0};
    case SleepStage::kN2:
      return {13.0, 15.0};
    case SleepStage::kN3:
      return {1.2, 3.2};
    case SleepStage::kREM:
      return {17.0, 19.0};
  }
  return {9.0, 11.0};
}

double EmgLevel(SleepStage s) {
  switch (s) {
    case SleepStage::kW:
      return 1.0;
    case SleepStage::kN1:
      return 0.6;
    case SleepStage::kN2:
      return 0.4;
    case SleepStage::kN3:
      return 0.3;
    case SleepStage::kREM:
      return 0.1;
  }
  return 1.0;
}

std::string SubjectId(const SyntheticCorpusOptions& o, int index) {
  std::ostringstream os;
  os << o.subject_prefix;
  os.width(3);
  os.fill('0');
  os << index + 1;
  return os.str();
}

}  // namespace

std::vector<std::string> PhysionetLikeChannels() {
  return {"EEG Fpz-Cz", "EEG Pz-Oz", "EOG horizontal", "EMG submental"};
}

std::vector<std::string> IsrucLikeChannels() {
  return {"F3-A2", "C3-A2", "O1-A2", "F4-A1", "C4-A1", "O2-A1", "LOC-A2", "ROC-A1", "EMG chin"};
}

std::vector<SyntheticSubject> SynthesizeCorpus(const SyntheticCorpusOptions& options) {
  if (options.n_subjects < 1 || options.epochs_per_subject < 1) {
    Fail(ErrorCode::kUsage, "synthetic corpus needs at least one subject and one epoch");
  }
  if (!(options.sampling_hz >= 50.0)) {
    Fail(ErrorCode::kUsage, "synthetic sampling rate must be at least 50 Hz");
  }
  if (!(options.noise >= 0.0)) Fail(ErrorCode::kUsage, "noise must be >= 0");
  if (options.channels.empty()) Fail(ErrorCode::kUsage, "no channels requested");

  const auto per_epoch = static_cast<std::size_t>(std::lround(kEpochSeconds * options.sampling_hz));
  std::vector<SyntheticSubject> corpus;
  for (int s = 0; s < options.n_subjects; ++s) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                      static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(s)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unit;

    SyntheticSubject subject;
    for (int e = 0; e < options.epochs_per_subject; ++e) {
      subject.stages.push_back(StageFromIndex(static_cast<std::size_t>(e) % kNumStages));
    }
    std::shuffle(subject.stages.begin(), subject.stages.end(), rng);

    PsgRecord& rec = subject.record;
    rec.subject_id = SubjectId(options, s);
    rec.duration_s = kEpochSeconds * options.epochs_per_subject;
    for (const auto& name : options.channels) {
      Channel ch;
      ch.name = name;
      ch.sampling_hz = options.sampling_hz;
      ch.samples.reserve(per_epoch * subject.stages.size());
      rec.channels.push_back(std::move(ch));
    }
    const double dt = 1.0 / options.sampling_hz;
    for (SleepStage stage : subject.stages) {
      const FrequencyRange range = DominantRange(stage);
      const double freq = range.lo + (range.hi - range.lo) * unit(rng);
      const bool eye_movements = stage == SleepStage::kW || stage == SleepStage::kREM;
      for (Channel& ch : rec.channels) {
        const ChannelRole role = ResolveChannelRole(ch.name);
        const double amp = kAmplitudeUv * (0.8 + 0.4 * unit(rng));
        const double phase = 2.0 * std::numbers::pi * unit(rng);
        const double eye_phase = 2.0 * std::numbers::pi * unit(rng);
        for (std::size_t i = 0; i < per_epoch; ++i) {
          const double t = static_cast<double>(i) * dt;
          const double wave = std::sin(2.0 * std::numbers::pi * freq * t + phase);
          const double noise = options.noise * kAmplitudeUv * gauss(rng);
          double v = 0.0;
          switch (role) {
            case ChannelRole::kEmg:
              v = EmgLevel(stage) * kAmplitudeUv * gauss(rng) + 0.2 * amp * wave;
              break;
            case ChannelRole::kEog:
              v = 0.5 * amp * wave + noise +
                  (eye_movements
                       ? amp * std::sin(2.0 * std::numbers::pi * 0.7 * t + eye_phase)
                       : 0.0);
              break;
            default:
              v = amp * wave + noise;
              break;
          }
          ch.samples.push_back(static_cast<float>(v));
        }
      }
    }
    corpus.push_back(std::move(subject));
  }
  return corpus;
}

std::string FormatLabelFile(std::span<const SleepStage> stages) {
  std::string out;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    out += std::to_string(i) + "\t" + std::string(StageName(stages[i])) + "\n";
  }
  return out;
}

void WriteSyntheticCorpus(const SyntheticCorpusOptions& options,
                          const std::filesystem::path& edf_dir,
                          const std::filesystem::path& label_dir) {
  std::filesystem::create_directories(edf_dir);
  std::filesystem::create_directories(label_dir);
  for (const SyntheticSubject& s : SynthesizeCorpus(options)) {
    WriteFileAtomic(edf_dir / (s.record.subject_id + ".edf"), WriteEdf(s.record));
    WriteFileAtomic(label_dir / (s.record.subject_id + ".tsv"), FormatLabelFile(s.stages));
  }
}

}  // namespace nisleep
