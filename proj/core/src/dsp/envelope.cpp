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

#include "dogvc/dsp/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dogvc/dsp/fft.hpp"

namespace dogvc::dsp {

namespace {

// Keeps quefrencies |m| <= order of a real, even log spectrum.
std::vector<double> lifter(const std::vector<double>& log_spec, int n, int order) {
  std::vector<std::complex<double>> half(log_spec.begin(), log_spec.end());
  auto cep = irfft(half, n);
  for (int m = order + 1; m <= n - order - 1; ++m) cep[m] = 0.0;
  const auto back = rfft(cep, n);
  std::vector<double> out(log_spec.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = back[k].real();
  return out;
}

}  // namespace

Matrix spectral_envelope(const Waveform& w, const F0Track& f0, const EnvelopeConfig& cfg) {
  const Matrix pw = power(stft(w, cfg.stft));
  const int frames = static_cast<int>(pw.rows());
  if (f0.num_frames() != frames) throw Error("spectral_envelope: F0 track not aligned to frame grid");
  const int n = cfg.stft.n_fft;
  const int bins = cfg.stft.bins();
  const double bin_hz = static_cast<double>(w.sample_rate) / n;
  const double tol = cfg.tolerance_db / (10.0 / std::log(10.0));
  const int half_width = std::max(0, static_cast<int>(std::lround(0.5 * cfg.unvoiced_smoothing_hz / bin_hz)));

  Matrix env(frames, bins);
  std::vector<double> log_spec(static_cast<std::size_t>(bins));
  for (int t = 0; t < frames; ++t) {
    if (f0.voiced[t] && f0.f0[t] > 0.0) {
      for (int k = 0; k < bins; ++k) log_spec[k] = std::log(std::max(pw(t, k), cfg.power_floor));
      const int order = std::clamp(static_cast<int>(0.5 * w.sample_rate / f0.f0[t]), 2, bins - 2);
      auto smooth = lifter(log_spec, n, order);
      for (int it = 0; it < cfg.max_iterations; ++it) {
        double worst = 0.0;
        std::vector<double> lifted(log_spec.size());
        for (int k = 0; k < bins; ++k) {
          worst = std::max(worst, log_spec[k] - smooth[k]);
          lifted[k] = std::max(log_spec[k], smooth[k]);
        }
        if (worst < tol) break;
        smooth = lifter(lifted, n, order);
      }
      for (int k = 0; k < bins; ++k) env(t, k) = std::max(std::exp(smooth[k]), cfg.power_floor);
    } else {
      for (int k = 0; k < bins; ++k) {
        const int lo = std::max(0, k - half_width), hi = std::min(bins - 1, k + half_width);
        double acc = 0.0;
        for (int j = lo; j <= hi; ++j) acc += pw(t, j);
        log_spec[k] = std::log(std::max(acc / (hi - lo + 1), cfg.power_floor));
      }
      const auto smooth = lifter(log_spec, n, std::min(cfg.unvoiced_order, bins - 2));
      for (int k = 0; k < bins; ++k) env(t, k) = std::max(std::exp(smooth[k]), cfg.power_floor);
    }
  }
  return env;
}

double warp_frequency(double omega, double alpha) {
  return omega + 2.0 * std::atan2(alpha * std::sin(omega), 1.0 - alpha * std::cos(omega));
}

FeatureSequence mcc_from_envelope(const Matrix& envelope, int order, double alpha, double frame_hop) {
  if (order < 1) throw Error("mcc_from_envelope: order must be >= 1");
  if (!(std::abs(alpha) < 1.0)) throw Error("mcc_from_envelope: |alpha| must be < 1");
  const auto bins = static_cast<int>(envelope.cols());
  if (bins < 3) throw Error("mcc_from_envelope: envelope needs at least 3 bins");
  const int n = 2 * (bins - 1);
  if (order > n / 2) throw Error("mcc_from_envelope: order exceeds the envelope resolution");

  // Linear-frequency position (in bins) of each uniformly spaced warped bin.
  std::vector<int> idx(static_cast<std::size_t>(bins));
  std::vector<double> frac(static_cast<std::size_t>(bins));
  for (int j = 0; j < bins; ++j) {
    const double warped = std::numbers::pi * j / (bins - 1);
    const double pos = std::clamp(warp_frequency(warped, -alpha) / std::numbers::pi * (bins - 1), 0.0,
                                  static_cast<double>(bins - 1));
    idx[j] = std::min(static_cast<int>(pos), bins - 2);
    frac[j] = pos - idx[j];
  }

  FeatureSequence out;
  out.kind = FeatureKind::mcc;
  out.alpha = alpha;
  out.frame_hop = frame_hop;
  out.frames.resize(envelope.rows(), order + 1);
  std::vector<std::complex<double>> half(static_cast<std::size_t>(bins));
  for (Eigen::Index t = 0; t < envelope.rows(); ++t) {
    for (int j = 0; j < bins; ++j) {
      const double a = std::log(envelope(t, idx[j]));
      const double b = std::log(envelope(t, idx[j] + 1));
      half[j] = a + frac[j] * (b - a);
    }
    const auto cep = irfft(half, n);
    for (int m = 0; m <= order; ++m) out.frames(t, m) = cep[m];
  }
  return out;
}

Matrix envelope_from_mcc(const FeatureSequence& mcc, int n_fft) {
  if (mcc.kind != FeatureKind::mcc) throw Error("envelope_from_mcc: expected mcc features");
  if (n_fft < 4 || n_fft % 2 != 0) throw Error("envelope_from_mcc: n_fft must be even and >= 4");
  const int bins = n_fft / 2 + 1;
  const int coeffs = mcc.dim();
  Matrix basis(coeffs, bins);
  for (int k = 0; k < bins; ++k) {
    const double warped = warp_frequency(std::numbers::pi * k / (bins - 1), mcc.alpha);
    basis(0, k) = 1.0;
    for (int m = 1; m < coeffs; ++m) basis(m, k) = 2.0 * std::cos(m * warped);
  }
  Matrix env = (mcc.frames * basis).array().exp().matrix();
  return env;
}

BandAperiodicity estimate_aperiodicity(const Waveform& w, const F0Track& f0, const StftConfig& stft_cfg,
                                       double boundary_hz) {
  const Matrix pw = power(stft(w, stft_cfg));
  const int frames = static_cast<int>(pw.rows());
  if (f0.num_frames() != frames) throw Error("estimate_aperiodicity: F0 track not aligned to frame grid");
  const int n = stft_cfg.n_fft;
  const int bins = stft_cfg.bins();
  const int split = std::clamp(static_cast<int>(std::lround(boundary_hz * n / w.sample_rate)), 1, bins - 1);

  // Autocorrelation of the analysis window, used to undo its taper.
  const auto window = make_window(stft_cfg.window, stft_cfg.frame_len);
  auto wspec = rfft(window, n);
  for (auto& c : wspec) c = std::norm(c);
  const auto wacf = irfft(wspec, n);

  BandAperiodicity ap;
  ap.boundary_hz = boundary_hz;
  ap.values = Matrix::Ones(frames, 2);
  std::vector<std::complex<double>> band(static_cast<std::size_t>(bins));
  for (int t = 0; t < frames; ++t) {
    if (!f0.voiced[t] || f0.f0[t] <= 0.0) continue;
    const double lag = w.sample_rate / f0.f0[t];
    const int l0 = static_cast<int>(lag);
    const double lf = lag - l0;
    if (l0 + 1 >= n / 2) continue;
    for (int b = 0; b < 2; ++b) {
      for (int k = 0; k < bins; ++k) {
        const bool in_band = b == 0 ? k < split : k >= split;
        band[k] = in_band ? pw(t, k) : 0.0;
      }
      const auto acf = irfft(band, n);
      if (acf[0] <= 1e-20) continue;
      const double r_sig = (1.0 - lf) * acf[l0] + lf * acf[l0 + 1];
      const double r_win = (1.0 - lf) * wacf[l0] + lf * wacf[l0 + 1];
      const double r = r_win > 1e-12 ? (r_sig / acf[0]) / (r_win / wacf[0]) : 0.0;
      ap.values(t, b) = std::clamp(1.0 - r, 1e-3, 1.0);
    }
  }
  return ap;
}

}  // namespace dogvc::dsp
