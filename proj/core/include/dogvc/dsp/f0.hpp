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

#include <optional>
#include <span>
#include <vector>

#include "dogvc/dsp/audio.hpp"
#include "dogvc/dsp/stft.hpp"

namespace dogvc::dsp {

struct F0Config {
  StftConfig grid;        // frame_len and hop define the analysis frames
  double f0_floor = 60.0;
  double f0_ceil = 1600.0;
  double voicing_threshold = 0.5;  // minimum normalized cross-correlation peak
};

struct F0Track {
  std::vector<double> f0;           // Hz, 0 when unvoiced
  std::vector<bool> voiced;
  std::vector<double> periodicity;  // correlation peak per frame, in [0, 1]
  double frame_hop = 0.008;         // seconds

  int num_frames() const { return static_cast<int>(f0.size()); }
};

/// Per-frame F0 by normalized cross-correlation with parabolic peak
/// interpolation. The frame grid matches stft() with the same StftConfig.
F0Track estimate_f0(const Waveform& w, const F0Config& cfg);
F0Track estimate_f0(const Waveform& w, double f0_floor, double f0_ceil);

/// Median over voiced frames; empty when nothing is voiced.
std::optional<double> median_voiced_f0(const F0Track& track);

/// Mean and standard deviation of log F0 over voiced frames.
struct LogF0Stats {
  double mean = 0.0;
  double std = 0.0;
  std::size_t frames = 0;
};

LogF0Stats fit_log_f0(std::span<const F0Track> tracks);

}  // namespace dogvc::dsp
