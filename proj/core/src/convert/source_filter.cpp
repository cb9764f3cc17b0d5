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

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "dogvc/convert.hpp"
#include "dogvc/dsp/envelope.hpp"

namespace dogvc::convert {

void limit_peak(dsp::Waveform& w, double peak) {
  double mx = 0.0;
  for (double v : w.samples) mx = std::max(mx, std::abs(v));
  if (mx <= peak || mx == 0.0) return;
  const double g = peak / mx;
  for (double& v : w.samples) v *= g;
}

namespace {

// F0 per output sample, interpolated between frame centres; 0 where the
// nearest frame is unvoiced.
std::vector<double> sample_f0(const dsp::F0Track& f0, const dsp::StftConfig& stft, std::size_t length) {
  const int frames = f0.num_frames();
  const double half = stft.frame_len / 2.0;
  std::vector<double> out(length, 0.0);
  for (std::size_t n = 0; n < length; ++n) {
    const double pos = std::clamp((static_cast<double>(n) - half) / stft.hop, 0.0, frames - 1.0);
    const int k0 = static_cast<int>(std::floor(pos));
    const int k1 = std::min(k0 + 1, frames - 1);
    const double frac = pos - k0;
    const int nearest = frac < 0.5 ? k0 : k1;
    if (!f0.voiced[nearest]) continue;
    double a = f0.voiced[k0] ? f0.f0[k0] : f0.f0[k1];
    double b = f0.voiced[k1] ? f0.f0[k1] : f0.f0[k0];
    out[n] = a + (b - a) * frac;
  }
  return out;
}

}  // namespace

dsp::Waveform synthesize_from_envelope(const Matrix& envelope, const dsp::F0Track& f0,
                                       const dsp::BandAperiodicity& ap, const SynthesisConfig& cfg) {
  cfg.stft.validate();
  const int frames = static_cast<int>(envelope.rows());
  if (frames < 1) throw Error("synthesis: empty envelope");
  if (envelope.cols() != cfg.stft.bins()) {
    throw Error(fmt::format("synthesis: envelope has {} bins, expected {}", envelope.cols(), cfg.stft.bins()));
  }
  if (f0.num_frames() != frames || ap.values.rows() != frames) {
    throw Error(fmt::format("synthesis: misaligned frame grids (envelope {}, f0 {}, aperiodicity {})", frames,
                            f0.num_frames(), ap.values.rows()));
  }
  if (ap.values.cols() != 2) throw Error("synthesis: aperiodicity must have two bands");

  const std::size_t length = dsp::span_samples(frames, cfg.stft);
  const double sr = cfg.sample_rate;
  const auto f0s = sample_f0(f0, cfg.stft, length);

  dsp::Waveform pulses{std::vector<double>(length, 0.0), cfg.sample_rate};
  double phase = 1.0;
  for (std::size_t n = 0; n < length; ++n) {
    if (f0s[n] <= 0) {
      phase = 1.0;
      continue;
    }
    if (phase >= 1.0) {
      pulses.samples[n] = std::sqrt(sr / f0s[n]);  // unit mean power
      phase -= std::floor(phase);
    }
    phase += f0s[n] / sr;
  }
  dsp::Waveform noise{std::vector<double>(length), cfg.sample_rate};
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : noise.samples) v = normal(rng);

  const auto window = dsp::make_window(cfg.stft.window, cfg.stft.frame_len);
  double wsum = 0.0, wsq = 0.0;
  for (double v : window) {
    wsum += v;
    wsq += v * v;
  }
  const auto p = dsp::stft(pulses, cfg.stft).bins;
  const auto nz = dsp::stft(noise, cfg.stft).bins;
  ComplexMatrix out(frames, cfg.stft.bins());
  for (int t = 0; t < frames; ++t) {
    const bool voiced = f0.voiced[t] && f0.f0[t] > 0;
    const double period = voiced ? sr / f0.f0[t] : 0.0;
    for (int b = 0; b < cfg.stft.bins(); ++b) {
      const double hz = b * sr / cfg.stft.n_fft;
      const double env = std::max(envelope(t, b), 0.0);
      const double noise_gain = std::sqrt(env / wsq);
      if (!voiced) {
        out(t, b) = nz(t, b) * noise_gain;
        continue;
      }
      const double a = std::clamp(ap.values(t, hz < ap.boundary_hz ? 0 : 1), 0.0, 1.0);
      // Harmonic peaks of a unit-power pulse train reach wsum^2 / period.
      // Unit-variance noise has the same average power density, so the
      // aperiodic share uses the same gain.
      const double pulse_gain = std::sqrt(env * period) / wsum;
      out(t, b) = (p(t, b) * std::sqrt(1.0 - a) + nz(t, b) * std::sqrt(a)) * pulse_gain;
    }
  }
  dsp::Waveform w{dsp::istft(out, cfg.stft, length), cfg.sample_rate};
  for (double v : w.samples) {
    if (!std::isfinite(v)) throw Error("synthesis produced non-finite samples");
  }
  limit_peak(w, cfg.peak);
  return w;
}

dsp::Waveform synthesize_source_filter(const dsp::FeatureSequence& mcc, const dsp::F0Track& f0,
                                       const dsp::BandAperiodicity& ap, const SynthesisConfig& cfg) {
  if (mcc.kind != dsp::FeatureKind::mcc) throw Error("source-filter synthesis needs mcc features");
  return synthesize_from_envelope(dsp::envelope_from_mcc(mcc, cfg.stft.n_fft), f0, ap, cfg);
}

}  // namespace dogvc::convert
