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

#include "dogvc/dsp/f0.hpp"
#include "dogvc/dsp/features.hpp"

namespace dogvc::dsp {

struct EnvelopeConfig {
  StftConfig stft;
  double unvoiced_smoothing_hz = 300.0;  // linear-power smoothing width for unvoiced frames
  int unvoiced_order = 40;               // cepstral lifter for unvoiced frames
  int max_iterations = 100;              // true-envelope iterations for voiced frames
  double tolerance_db = 1.0;             // stop when no bin exceeds the envelope by more
  double power_floor = 1e-10;
};

/// Smooth positive power envelope, T x (n_fft/2+1). Voiced frames use an
/// iterated cepstral ("true") envelope whose lifter follows the local F0, so
/// harmonic peaks lie on or under the envelope; unvoiced frames use a
/// frequency-smoothed periodogram with a fixed lifter.
Matrix spectral_envelope(const Waveform& w, const F0Track& f0, const EnvelopeConfig& cfg);

/// Phase response of the first-order all-pass warping: maps linear
/// frequency (rad, [0, pi]) onto the warped axis.
double warp_frequency(double omega, double alpha);

/// Mel-cepstrum of the log envelope: coefficients 0..order such that
/// log env(w) = c0 + 2 sum_m c_m cos(m * warp(w)). alpha = 0 gives the plain
/// real cepstrum.
FeatureSequence mcc_from_envelope(const Matrix& envelope, int order, double alpha,
                                  double frame_hop = 0.008);

/// Inverse of mcc_from_envelope on an n_fft/2+1 bin grid.
Matrix envelope_from_mcc(const FeatureSequence& mcc, int n_fft);

/// Two-band aperiodicity (values in (0, 1]; 1 = fully noise-like). Column 0
/// covers [0, boundary_hz), column 1 the rest.
struct BandAperiodicity {
  Matrix values;  // T x 2
  double boundary_hz = 4000.0;
};

BandAperiodicity estimate_aperiodicity(const Waveform& w, const F0Track& f0, const StftConfig& stft,
                                       double boundary_hz = 4000.0);

}  // namespace dogvc::dsp
