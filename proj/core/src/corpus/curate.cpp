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
#include <limits>

#include "dogvc/corpus.hpp"
#include "dogvc/dsp/stft.hpp"

namespace dogvc::corpus {

std::string to_string(RejectReason r) {
  switch (r) {
    case RejectReason::soft:
      return "soft";
    case RejectReason::loud:
      return "loud";
    case RejectReason::noisy:
      return "noisy";
  }
  return "unknown";
}

namespace {

constexpr double kMaxSnrDb = 120.0;

double temporal_contrast_db(const dsp::Waveform& w) {
  const int frame = std::max(1, w.sample_rate * 32 / 1000);
  const int hop = std::max(1, frame / 2);
  std::vector<double> energy;
  for (std::size_t start = 0; start + frame <= w.samples.size(); start += hop) {
    double e = 0.0;
    for (int i = 0; i < frame; ++i) e += w.samples[start + i] * w.samples[start + i];
    energy.push_back(e / frame);
  }
  if (energy.size() < 2) return 0.0;
  std::sort(energy.begin(), energy.end());
  const std::size_t n = std::max<std::size_t>(1, energy.size() / 5);
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lo += energy[i];
    hi += energy[energy.size() - 1 - i];
  }
  if (hi <= 0.0) return 0.0;
  if (lo <= 0.0) return kMaxSnrDb;
  return std::min(kMaxSnrDb, 10.0 * std::log10(hi / lo));
}

double spectral_structure_db(const dsp::Waveform& w) {
  dsp::StftConfig cfg;
  cfg.n_fft = 512;
  cfg.frame_len = 512;
  cfg.hop = 256;
  if (w.samples.size() < static_cast<std::size_t>(cfg.frame_len)) return 0.0;
  const Matrix pw = dsp::power(dsp::stft(w, cfg));
  const Vector avg = pw.colwise().mean().transpose();
  const double bin_hz = static_cast<double>(w.sample_rate) / cfg.n_fft;
  const int lo = std::max(1, static_cast<int>(std::ceil(50.0 / bin_hz)));
  const int hi = std::min(static_cast<int>(avg.size()) - 1,
                          static_cast<int>(std::floor(0.95 * w.sample_rate / 2.0 / bin_hz)));
  if (hi <= lo) return 0.0;
  double log_sum = 0.0, sum = 0.0;
  for (int k = lo; k <= hi; ++k) {
    const double p = std::max(avg(k), 1e-30);
    log_sum += std::log(p);
    sum += p;
  }
  const int n = hi - lo + 1;
  const double arith = sum / n;
  if (arith <= 1e-30) return 0.0;
  const double flatness = std::exp(log_sum / n) / arith;
  return std::min(kMaxSnrDb, -10.0 * std::log10(std::max(flatness, 1e-12)));
}

}  // namespace

double estimate_snr_db(const dsp::Waveform& w) {
  return std::max(temporal_contrast_db(w), spectral_structure_db(w));
}

CurationResult curate(std::span<const AudioClip> clips, const CurationThresholds& thresholds,
                      const AudioLoader& loader) {
  if (!(thresholds.loud_db_min < thresholds.loud_db_max)) {
    throw Error("curate: loud_db_min must be below loud_db_max");
  }
  CurationResult result;
  for (const auto& clip : clips) {
    const auto w = loader(clip);
    const double level = dsp::rms_dbfs(w);
    if (level < thresholds.loud_db_min) {
      result.rejected.push_back({clip, RejectReason::soft, level, 0.0});
      continue;
    }
    if (level > thresholds.loud_db_max) {
      result.rejected.push_back({clip, RejectReason::loud, level, 0.0});
      continue;
    }
    const double snr = estimate_snr_db(w);
    if (snr < thresholds.snr_min) {
      result.rejected.push_back({clip, RejectReason::noisy, level, snr});
      continue;
    }
    result.kept.push_back(clip);
  }
  return result;
}

PitchSplit split_by_pitch(std::span<const AudioClip> clips, double f0_threshold, const AudioLoader& loader,
                          const dsp::F0Config& f0_cfg) {
  if (!(f0_threshold > 0.0)) throw Error("split_by_pitch: threshold must be positive");
  PitchSplit out;
  for (const auto& clip : clips) {
    const auto track = dsp::estimate_f0(loader(clip), f0_cfg);
    const auto median = dsp::median_voiced_f0(track);
    if (!median) {
      out.unvoiced.push_back(clip.id);
      out.low_pitch.push_back(clip);
      continue;
    }
    out.median_f0[clip.id] = *median;
    (*median > f0_threshold ? out.high_pitch : out.low_pitch).push_back(clip);
  }
  return out;
}

}  // namespace dogvc::corpus
