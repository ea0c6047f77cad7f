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

// Synthetic polysomnography corpora with a known stage-to-spectrum mapping,
// used for fixtures and end-to-end checks.
//
// Each epoch's EEG carries one dominant sinusoid whose frequency lies inside
// the band associated with its stage:
//
//   N3 -> delta (1.2-3.2 Hz)    N1 -> theta (5-7 Hz)    W -> alpha (9-11 Hz)
//   N2 -> sigma (13-15 Hz)      REM -> 17-19 Hz (beta above sigma)
//
// plus white noise. EOG mixes an attenuated copy with slow eye movements
// during W and REM; EMG is noise whose level falls from W to REM.

#ifndef NISLEEP_SYNTHETIC_H_
#define NISLEEP_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nisleep/psg.h"
#include "nisleep/stage.h"

namespace nisleep {

// Fpz-Cz, Pz-Oz, horizontal EOG and submental EMG.
std::vector<std::string> PhysionetLikeChannels();
// Six EEG derivations, two EOG and one chin EMG.
std::vector<std::string> IsrucLikeChannels();

struct SyntheticCorpusOptions {
  int n_subjects = 6;
  int epochs_per_subject = 40;
  double sampling_hz = 100.0;
  std::vector<std::string> channels = PhysionetLikeChannels();
  // Noise standard deviation relative to the dominant sinusoid amplitude.
  double noise = 0.3;
  std::uint64_t seed = 0;
  std::string subject_prefix = "SYN";
};

struct SyntheticSubject {
  PsgRecord record;
  std::vector<SleepStage> stages;  // one per 30 s epoch
};

// Stage sequences are balanced across the five stages and shuffled.
std::vector<SyntheticSubject> SynthesizeCorpus(const SyntheticCorpusOptions& options);

// `epoch_index<TAB>stage` lines.
std::string FormatLabelFile(std::span<const SleepStage> stages);

// Writes <subject>.edf into edf_dir and <subject>.tsv into label_dir.
void WriteSyntheticCorpus(const SyntheticCorpusOptions& options,
                          const std::filesystem::path& edf_dir,
                          const std::filesystem::path& label_dir);

}  // namespace nisleep

#endif  // NISLEEP_SYNTHETIC_H_
