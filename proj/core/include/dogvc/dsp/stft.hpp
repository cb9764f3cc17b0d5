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

#include <cstddef>
#include <vector>

#include "dogvc/common.hpp"
#include "dogvc/dsp/audio.hpp"

namespace dogvc::dsp {

enum class WindowKind { hann, hamming, rectangular };

/// Periodic window of the given length.
std::vector<double> make_window(WindowKind kind, int length);

struct StftConfig {
  int n_fft = 1024;
  int frame_len = 1024;  // 64 ms at 16 kHz
  int hop = 128;         // 8 ms at 16 kHz
  WindowKind window = WindowKind::hann;

  void validate() const;
  int bins() const { return n_fft / 2 + 1; }
};

/// Frames start at sample k*hop; no reflection padding. Signals shorter than
/// one frame yield a single zero-padded frame.
int frame_count(std::size_t n_samples, const StftConfig& cfg);

struct Spectrogram {
  ComplexMatrix bins;   // T x (n_fft/2+1)
  bool padded = false;  // input was shorter than frame_len
};

Spectrogram stft(const Waveform& w, const StftConfig& cfg);

/// |X|^2 elementwise.
Matrix power(const Spectrogram& s);

/// Weighted overlap-add inverse (least-squares ISTFT). Returns `length` samples.
std::vector<double> istft(const ComplexMatrix& bins, const StftConfig& cfg, std::size_t length);

/// Number of samples spanned by T frames.
std::size_t span_samples(int frames, const StftConfig& cfg);

}  // namespace dogvc::dsp
