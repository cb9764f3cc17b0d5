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

#include <cstdint>
#include <string>

#include "dogvc/dsp/envelope.hpp"
#include "dogvc/dsp/f0.hpp"
#include "dogvc/dsp/mel.hpp"

namespace dogvc::dsp {

/// Everything needed to turn a waveform into either feature path. One
/// StftConfig drives all analyses so that frame grids line up.
struct AnalysisConfig {
  int sample_rate = 16000;
  StftConfig stft;
  int n_mels = 80;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-10;
  int mcc_order = 35;
  double alpha = 0.42;
  double f0_floor = 60.0;
  double f0_ceil = 1600.0;
  double voicing_threshold = 0.5;
  double aperiodicity_boundary_hz = 4000.0;

  MelConfig mel() const;
  F0Config f0() const;
  EnvelopeConfig envelope() const;
  std::uint64_t hash() const;
  std::string to_json() const;
  static AnalysisConfig from_json(const std::string& text);
};

/// Source-filter decomposition used by the MCC path.
struct SourceFilterAnalysis {
  F0Track f0;
  Matrix envelope;
  BandAperiodicity aperiodicity;
  FeatureSequence mcc;
};

SourceFilterAnalysis analyze_source_filter(const Waveform& w, const AnalysisConfig& cfg);

/// melspec or mcc features for a waveform already at cfg.sample_rate.
FeatureSequence extract_features(const Waveform& w, FeatureKind kind, const AnalysisConfig& cfg);

/// F0 as a T x 1 feature sequence (0 for unvoiced frames).
FeatureSequence f0_as_features(const F0Track& track, const AnalysisConfig& cfg);
F0Track f0_from_features(const FeatureSequence& seq);

}  // namespace dogvc::dsp
