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

#include "dogvc/dsp/f0.hpp"

#include <algorithm>
#include <cmath>

#include "dogvc/dsp/fft.hpp"

namespace dogvc::dsp {

namespace {

// Normalized cross-correlation of a frame with itself at lags [lo, hi].
// r(tau) = sum x[n]x[n+tau] / sqrt(sum_{n<L-tau} x^2 * sum_{n>=tau} x^2)
std::vector<double> nccf(const std::vector<double>& x, int lo, int hi) {
  const int len = static_cast<int>(x.size());
  int n = 1;
  while (n < 2 * len) n <<= 1;
  auto spec = rfft(x, n);
  for (auto& c : spec) c = std::norm(c);
  const auto acf = irfft(spec, n);

  std::vector<double> prefix(static_cast<std::size_t>(len) + 1, 0.0);
  for (int i = 0; i < len; ++i) prefix[i + 1] = prefix[i] + x[i] * x[i];

  std::vector<double> r(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (int tau = lo; tau <= hi; ++tau) {
    const double e0 = prefix[len - tau];
    const double e1 = prefix[len] - prefix[tau];
    const double den = std::sqrt(e0 * e1);
    r[tau - lo] = den > 1e-20 ? acf[tau] / den : 0.0;
  }
  return r;
}

}  // namespace

F0Track estimate_f0(const Waveform& w, const F0Config& cfg) {
  cfg.grid.validate();
  if (!(cfg.f0_floor > 0.0 && cfg.f0_floor < cfg.f0_ceil && cfg.f0_ceil <= w.sample_rate / 2.0)) {
    throw Error("estimate_f0: require 0 < f0_floor < f0_ceil <= sr/2");
  }
  const int sr = w.sample_rate;
  const int len = cfg.grid.frame_len;
  const int tau_min = std::max(2, static_cast<int>(std::floor(sr / cfg.f0_ceil)));
  const int tau_max = std::min(len / 2, static_cast<int>(std::ceil(sr / cfg.f0_floor)));
  if (tau_max <= tau_min + 1) throw Error("estimate_f0: frame too short for the F0 range");
  const int lo = tau_min - 1, hi = tau_max + 1;

  const int frames = frame_count(w.samples.size(), cfg.grid);
  F0Track track;
  track.frame_hop = static_cast<double>(cfg.grid.hop) / sr;
  track.f0.assign(frames, 0.0);
  track.voiced.assign(frames, false);
  track.periodicity.assign(frames, 0.0);

  std::vector<double> seg(static_cast<std::size_t>(len));
  for (int t = 0; t < frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * cfg.grid.hop;
    double mean = 0.0;
    for (int i = 0; i < len; ++i) {
      const std::size_t idx = start + i;
      seg[i] = idx < w.samples.size() ? w.samples[idx] : 0.0;
      mean += seg[i];
    }
    mean /= len;
    double energy = 0.0;
    for (auto& s : seg) {
      s -= mean;
      energy += s * s;
    }
    if (energy / len < 1e-12) continue;

    const auto r = nccf(seg, lo, hi);
    auto at = [&](int tau) { return r[tau - lo]; };
    double best = 0.0;
    for (int tau = tau_min; tau <= tau_max; ++tau) best = std::max(best, at(tau));
    if (best <= 0.0) continue;

    // Shortest lag whose local maximum is close to the global one avoids
    // picking sub-harmonics of strongly periodic frames.
    int pick = -1;
    for (int tau = tau_min; tau <= tau_max; ++tau) {
      if (at(tau) >= 0.95 * best && at(tau) >= at(tau - 1) && at(tau) >= at(tau + 1)) {
        pick = tau;
        break;
      }
    }
    if (pick < 0) continue;
    const double peak = at(pick);
    track.periodicity[t] = std::clamp(peak, 0.0, 1.0);
    if (peak < cfg.voicing_threshold) continue;

    const double a = at(pick - 1), b = peak, c = at(pick + 1);
    const double den = a - 2.0 * b + c;
    const double delta = std::abs(den) > 1e-12 ? std::clamp(0.5 * (a - c) / den, -0.5, 0.5) : 0.0;
    track.f0[t] = std::clamp(sr / (pick + delta), cfg.f0_floor, cfg.f0_ceil);
    track.voiced[t] = true;
  }
  return track;
}

F0Track estimate_f0(const Waveform& w, double f0_floor, double f0_ceil) {
  F0Config cfg;
  cfg.f0_floor = f0_floor;
  cfg.f0_ceil = f0_ceil;
  return estimate_f0(w, cfg);
}

std::optional<double> median_voiced_f0(const F0Track& track) {
  std::vector<double> v;
  for (int t = 0; t < track.num_frames(); ++t) {
    if (track.voiced[t]) v.push_back(track.f0[t]);
  }
  if (v.empty()) return std::nullopt;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

LogF0Stats fit_log_f0(std::span<const F0Track> tracks) {
  double sum = 0.0, sq = 0.0;
  LogF0Stats out;
  for (const auto& tr : tracks) {
    for (int t = 0; t < tr.num_frames(); ++t) {
      if (!tr.voiced[t] || tr.f0[t] <= 0) continue;
      const double l = std::log(tr.f0[t]);
      sum += l;
      sq += l * l;
      ++out.frames;
    }
  }
  if (out.frames == 0) return out;
  out.mean = sum / static_cast<double>(out.frames);
  out.std = std::sqrt(std::max(0.0, sq / static_cast<double>(out.frames) - out.mean * out.mean));
  return out;
}

}  // namespace dogvc::dsp
