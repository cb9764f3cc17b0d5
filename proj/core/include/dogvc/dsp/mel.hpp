// Copyright 2026 The dogvc Authors
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

#pragma once

#include <vector>

#include "dogvc/dsp/features.hpp"
#include "dogvc/dsp/stft.hpp"

namespace dogvc::dsp {

/// HTK mel scale: m = 2595 log10(1 + f/700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Center frequencies (Hz) of `n_mels` triangles whose edges are n_mels+2
/// points spaced linearly on the mel scale between fmin and fmax.
std::vector<double> mel_center_frequencies(int n_mels, double fmin, double fmax);

/// n_mels x (n_fft/2+1) triangular filterbank with unit peak height.
/// Throws when any filter ends up with no non-zero weight.
Matrix mel_filterbank(int n_fft, int n_mels, double fmin, double fmax, int sample_rate);

struct MelConfig {
  int sample_rate = 16000;
  StftConfig stft;
  int n_mels = 80;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-10;  // applied to power before the log
};

/// log(max(filterbank * |STFT|^2, floor)), T x n_mels.
FeatureSequence mel_spectrogram(const Waveform& w, const MelConfig& cfg);

std::uint64_t config_hash(const MelConfig& cfg);

}  // namespace dogvc::dsp
