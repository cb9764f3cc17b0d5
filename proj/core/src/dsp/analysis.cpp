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

#include "dogvc/dsp/analysis.hpp"

#include <nlohmann/json.hpp>

namespace dogvc::dsp {

MelConfig AnalysisConfig::mel() const {
  MelConfig m;
  m.sample_rate = sample_rate;
  m.stft = stft;
  m.n_mels = n_mels;
  m.fmin = fmin;
  m.fmax = fmax;
  m.log_floor = log_floor;
  return m;
}

F0Config AnalysisConfig::f0() const {
  F0Config c;
  c.grid = stft;
  c.f0_floor = f0_floor;
  c.f0_ceil = f0_ceil;
  c.voicing_threshold = voicing_threshold;
  return c;
}

EnvelopeConfig AnalysisConfig::envelope() const {
  EnvelopeConfig e;
  e.stft = stft;
  return e;
}

std::string AnalysisConfig::to_json() const {
  nlohmann::ordered_json j;
  j["sample_rate"] = sample_rate;
  j["n_fft"] = stft.n_fft;
  j["frame_len"] = stft.frame_len;
  j["hop"] = stft.hop;
  j["n_mels"] = n_mels;
  j["fmin"] = fmin;
  j["fmax"] = fmax;
  j["log_floor"] = log_floor;
  j["mcc_order"] = mcc_order;
  j["alpha"] = alpha;
  j["f0_floor"] = f0_floor;
  j["f0_ceil"] = f0_ceil;
  j["voicing_threshold"] = voicing_threshold;
  j["aperiodicity_boundary_hz"] = aperiodicity_boundary_hz;
  return j.dump();
}

AnalysisConfig AnalysisConfig::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  AnalysisConfig c;
  c.sample_rate = j.value("sample_rate", c.sample_rate);
  c.stft.n_fft = j.value("n_fft", c.stft.n_fft);
  c.stft.frame_len = j.value("frame_len", c.stft.frame_len);
  c.stft.hop = j.value("hop", c.stft.hop);
  c.n_mels = j.value("n_mels", c.n_mels);
  c.fmin = j.value("fmin", c.fmin);
  c.fmax = j.value("fmax", c.fmax);
  c.log_floor = j.value("log_floor", c.log_floor);
  c.mcc_order = j.value("mcc_order", c.mcc_order);
  c.alpha = j.value("alpha", c.alpha);
  c.f0_floor = j.value("f0_floor", c.f0_floor);
  c.f0_ceil = j.value("f0_ceil", c.f0_ceil);
  c.voicing_threshold = j.value("voicing_threshold", c.voicing_threshold);
  c.aperiodicity_boundary_hz = j.value("aperiodicity_boundary_hz", c.aperiodicity_boundary_hz);
  return c;
}

std::uint64_t AnalysisConfig::hash() const { return hash64(to_json()); }

SourceFilterAnalysis analyze_source_filter(const Waveform& w, const AnalysisConfig& cfg) {
  SourceFilterAnalysis a;
  a.f0 = estimate_f0(w, cfg.f0());
  a.envelope = spectral_envelope(w, a.f0, cfg.envelope());
  a.aperiodicity = estimate_aperiodicity(w, a.f0, cfg.stft, cfg.aperiodicity_boundary_hz);
  a.mcc = mcc_from_envelope(a.envelope, cfg.mcc_order, cfg.alpha,
                            static_cast<double>(cfg.stft.hop) / cfg.sample_rate);
  a.mcc.config_hash = cfg.hash();
  return a;
}

FeatureSequence extract_features(const Waveform& w, FeatureKind kind, const AnalysisConfig& cfg) {
  switch (kind) {
    case FeatureKind::melspec: {
      auto seq = mel_spectrogram(w, cfg.mel());
      seq.config_hash = cfg.hash();
      return seq;
    }
    case FeatureKind::mcc:
      return analyze_source_filter(w, cfg).mcc;
    case FeatureKind::f0:
      return f0_as_features(estimate_f0(w, cfg.f0()), cfg);
  }
  throw Error("extract_features: unknown kind");
}

FeatureSequence f0_as_features(const F0Track& track, const AnalysisConfig& cfg) {
  FeatureSequence seq;
  seq.kind = FeatureKind::f0;
  seq.frame_hop = track.frame_hop;
  seq.config_hash = cfg.hash();
  seq.frames.resize(track.num_frames(), 1);
  for (int t = 0; t < track.num_frames(); ++t) seq.frames(t, 0) = track.voiced[t] ? track.f0[t] : 0.0;
  return seq;
}

F0Track f0_from_features(const FeatureSequence& seq) {
  if (seq.kind != FeatureKind::f0 || seq.dim() != 1) throw Error("f0_from_features: expected T x 1 f0 features");
  F0Track t;
  t.frame_hop = seq.frame_hop;
  for (int i = 0; i < seq.num_frames(); ++i) {
    const double v = seq.frames(i, 0);
    t.f0.push_back(v > 0.0 ? v : 0.0);
    t.voiced.push_back(v > 0.0);
    t.periodicity.push_back(v > 0.0 ? 1.0 : 0.0);
  }
  return t;
}

}  // namespace dogvc::dsp
