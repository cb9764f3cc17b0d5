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

#include "dogvc/dsp/stft.hpp"

#include <cmath>
#include <numbers>

#include "dogvc/dsp/fft.hpp"

namespace dogvc::dsp {

std::vector<double> make_window(WindowKind kind, int length) {
  std::vector<double> w(static_cast<std::size_t>(length), 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < length; ++i) {
    const double phase = two_pi * i / length;
    switch (kind) {
      case WindowKind::hann:
        w[i] = 0.5 - 0.5 * std::cos(phase);
        break;
      case WindowKind::hamming:
        w[i] = 0.54 - 0.46 * std::cos(phase);
        break;
      case WindowKind::rectangular:
        break;
    }
  }
  return w;
}

void StftConfig::validate() const {
  if (hop <= 0) throw Error("stft: hop must be positive");
  if (frame_len < hop) throw Error("stft: frame_len must be >= hop");
  if (n_fft < frame_len) throw Error("stft: n_fft must be >= frame_len");
}

int frame_count(std::size_t n_samples, const StftConfig& cfg) {
  if (n_samples < static_cast<std::size_t>(cfg.frame_len)) return 1;
  return 1 + static_cast<int>((n_samples - cfg.frame_len) / cfg.hop);
}

std::size_t span_samples(int frames, const StftConfig& cfg) {
  return static_cast<std::size_t>(frames - 1) * cfg.hop + cfg.frame_len;
}

Spectrogram stft(const Waveform& w, const StftConfig& cfg) {
  cfg.validate();
  const auto window = make_window(cfg.window, cfg.frame_len);
  const int frames = frame_count(w.samples.size(), cfg);
  Spectrogram out;
  out.padded = w.samples.size() < static_cast<std::size_t>(cfg.frame_len);
  out.bins.resize(frames, cfg.bins());
  std::vector<double> seg(static_cast<std::size_t>(cfg.frame_len));
  for (int t = 0; t < frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * cfg.hop;
    for (int i = 0; i < cfg.frame_len; ++i) {
      const std::size_t idx = start + i;
      seg[i] = idx < w.samples.size() ? w.samples[idx] * window[i] : 0.0;
    }
    const auto spec = rfft(seg, cfg.n_fft);
    for (int k = 0; k < cfg.bins(); ++k) out.bins(t, k) = spec[k];
  }
  return out;
}

Matrix power(const Spectrogram& s) { return s.bins.cwiseAbs2(); }

std::vector<double> istft(const ComplexMatrix& bins, const StftConfig& cfg, std::size_t length) {
  cfg.validate();
  if (bins.cols() != cfg.bins()) throw Error("istft: bin count does not match n_fft");
  const auto window = make_window(cfg.window, cfg.frame_len);
  const auto frames = static_cast<int>(bins.rows());
  const std::size_t total = std::max(length, span_samples(frames, cfg));
  std::vector<double> out(total, 0.0), norm(total, 0.0);
  std::vector<std::complex<double>> row(static_cast<std::size_t>(cfg.bins()));
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < cfg.bins(); ++k) row[k] = bins(t, k);
    const auto seg = irfft(row, cfg.n_fft);
    const std::size_t start = static_cast<std::size_t>(t) * cfg.hop;
    for (int i = 0; i < cfg.frame_len; ++i) {
      out[start + i] += seg[i] * window[i];
      norm[start + i] += window[i] * window[i];
    }
  }
  for (std::size_t i = 0; i < total; ++i) {
    if (norm[i] > 1e-8) out[i] /= norm[i];
  }
  out.resize(length);
  return out;
}

}  // namespace dogvc::dsp
