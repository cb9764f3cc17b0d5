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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dogvc::dsp {

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
  /// Throws unless the rate is positive, the signal is non-empty and every sample is finite.
  void validate() const;
};

/// Decodes RIFF/WAVE bytes (PCM 8/16/24/32-bit integer or 32/64-bit float).
/// Multi-channel audio is mixed down to mono.
Waveform decode_wav(std::string_view bytes);
Waveform read_wav(const std::filesystem::path& path);

/// 16-bit PCM mono. Samples are clipped to [-1, 1].
std::string encode_wav(const Waveform& w);
void write_wav(const std::filesystem::path& path, const Waveform& w);

/// Band-limited resampling with a Hann-windowed sinc kernel.
Waveform resample(const Waveform& w, int target_rate);

double rms(const Waveform& w);
/// RMS level relative to a full-scale square wave; -inf for digital silence.
double rms_dbfs(const Waveform& w);

}  // namespace dogvc::dsp
