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

#include "dogvc/dsp/mel.hpp"

#include <cmath>
#include <fmt/format.h>
#include <sstream>

namespace dogvc::dsp {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

std::vector<double> mel_edges(int n_mels, double fmin, double fmax) {
  const double lo = hz_to_mel(fmin), hi = hz_to_mel(fmax);
  std::vector<double> edges(static_cast<std::size_t>(n_mels + 2));
  for (int i = 0; i < n_mels + 2; ++i) edges[i] = mel_to_hz(lo + (hi - lo) * i / (n_mels + 1));
  return edges;
}

}  // namespace

std::vector<double> mel_center_frequencies(int n_mels, double fmin, double fmax) {
  auto edges = mel_edges(n_mels, fmin, fmax);
  return {edges.begin() + 1, edges.end() - 1};
}

Matrix mel_filterbank(int n_fft, int n_mels, double fmin, double fmax, int sample_rate) {
  if (n_fft <= 0 || n_mels <= 0) throw Error("mel_filterbank: sizes must be positive");
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0)) {
    throw Error("mel_filterbank: require 0 <= fmin < fmax <= sr/2");
  }
  const int bins = n_fft / 2 + 1;
  const auto edges = mel_edges(n_mels, fmin, fmax);
  Matrix fb = Matrix::Zero(n_mels, bins);
  for (int m = 0; m < n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    bool any = false;
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      double v = 0.0;
      if (f > left && f <= center) {
        v = (f - left) / (center - left);
      } else if (f > center && f < right) {
        v = (right - f) / (right - center);
      }
      if (v > 0.0) {
        fb(m, k) = v;
        any = true;
      }
    }
    if (!any) {
      throw Error(fmt::format("mel_filterbank: filter {} is empty; n_mels={} too large for n_fft={}",
                              m, n_mels, n_fft));
    }
  }
  return fb;
}

FeatureSequence mel_spectrogram(const Waveform& w, const MelConfig& cfg) {
  if (w.sample_rate != cfg.sample_rate) {
    throw Error(fmt::format("mel_spectrogram: waveform rate {} != configured rate {}", w.sample_rate,
                            cfg.sample_rate));
  }
  const Matrix fb = mel_filterbank(cfg.stft.n_fft, cfg.n_mels, cfg.fmin, cfg.fmax, cfg.sample_rate);
  const Matrix pw = power(stft(w, cfg.stft));
  FeatureSequence out;
  out.kind = FeatureKind::melspec;
  out.frame_hop = static_cast<double>(cfg.stft.hop) / cfg.sample_rate;
  out.config_hash = config_hash(cfg);
  out.frames = (pw * fb.transpose()).array().max(cfg.log_floor).log().matrix();
  return out;
}

std::uint64_t config_hash(const MelConfig& cfg) {
  std::ostringstream ss;
  ss.precision(17);
  ss << "mel;sr=" << cfg.sample_rate << ";nfft=" << cfg.stft.n_fft << ";frame=" << cfg.stft.frame_len
     << ";hop=" << cfg.stft.hop << ";win=" << static_cast<int>(cfg.stft.window)
     << ";nmels=" << cfg.n_mels << ";fmin=" << cfg.fmin << ";fmax=" << cfg.fmax
     << ";floor=" << cfg.log_floor;
  return hash64(ss.str());
}

}  // namespace dogvc::dsp
