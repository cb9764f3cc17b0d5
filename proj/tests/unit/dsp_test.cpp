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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "dogvc/dsp/analysis.hpp"
#include "dogvc/dsp/fft.hpp"
#include "dogvc/dsp/mel.hpp"
#include "dogvc/dsp/stft.hpp"
#include "oracles.hpp"
#include "toy.hpp"

using namespace dogvc;
using namespace dogvc::dsp;
using dogvc::fixtures::TempDir;
using dogvc::fixtures::oracle_mel_power;
using dogvc::fixtures::random_audio;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST(Fft, MatchesDirectDft) {
  const auto w = random_audio(100, 1);
  const auto spec = rfft(w.samples, 128);
  for (int k = 0; k <= 64; ++k) {
    std::complex<double> acc = 0.0;
    for (int i = 0; i < 100; ++i) acc += w.samples[i] * std::polar(1.0, -2.0 * kPi * k * i / 128);
    EXPECT_NEAR(std::abs(spec[k] - acc), 0.0, 1e-10);
  }
  const auto back = irfft(spec, 128);
  for (int i = 0; i < 100; ++i) EXPECT_NEAR(back[i], w.samples[i], 1e-12);
}

TEST(Mel, MatchesDirectSummationOracle) {
  MelConfig cfg;
  cfg.stft = {256, 256, 64, WindowKind::hann};
  cfg.n_mels = 20;
  const auto w = random_audio(2048, 7);
  const Matrix got = mel_spectrogram(w, cfg).frames.array().exp().matrix();
  const Matrix want = oracle_mel_power(w, cfg);
  ASSERT_EQ(got.rows(), want.rows());
  ASSERT_EQ(got.cols(), want.cols());
  const double rel = ((got - want).cwiseAbs().array() / want.array()).maxCoeff();
  EXPECT_LT(rel, 1e-6);
}

TEST(Mel, DefaultConfigMatchesOracle) {
  MelConfig cfg;
  const auto w = random_audio(1024 + 2 * 128, 8);
  const Matrix got = mel_spectrogram(w, cfg).frames.array().exp().matrix();
  const Matrix want = oracle_mel_power(w, cfg);
  EXPECT_LT(((got - want).cwiseAbs().array() / want.array()).maxCoeff(), 1e-6);
}

TEST(Mel, ToneFallsInNearestCentreBin) {
  MelConfig cfg;
  const auto mel = mel_spectrogram(fixtures::sine(1000.0, 0.5), cfg).frames;
  const auto centres = mel_center_frequencies(cfg.n_mels, cfg.fmin, cfg.fmax);
  int nearest = 0;
  for (int m = 0; m < cfg.n_mels; ++m) {
    if (std::abs(centres[m] - 1000.0) < std::abs(centres[nearest] - 1000.0)) nearest = m;
  }
  Eigen::Index peak = 0;
  mel.row(mel.rows() / 2).maxCoeff(&peak);
  EXPECT_EQ(peak, nearest);
}

TEST(Mel, FilterbankRejectsImpossibleLayouts) {
  EXPECT_THROW(mel_filterbank(64, 200, 0.0, 8000.0, 16000), Error);
  EXPECT_THROW(mel_filterbank(1024, 80, 0.0, 9000.0, 16000), Error);
}

TEST(Stft, OverlapAddReconstructs) {
  StftConfig cfg;
  const auto w = random_audio(8000, 3);
  const auto spec = stft(w, cfg);
  const auto back = istft(spec.bins, cfg, w.samples.size());
  // Interior samples are covered by full window overlap.
  for (std::size_t i = 1024; i + 1024 < w.samples.size(); ++i) ASSERT_NEAR(back[i], w.samples[i], 1e-9) << i;
}

TEST(Wav, RoundTripIsSixteenBitAccurate) {
  TempDir dir("wav");
  const auto w = fixtures::sine(330.0, 0.25);
  write_wav(dir / "a.wav", w);
  const auto r = read_wav(dir / "a.wav");
  ASSERT_EQ(r.samples.size(), w.samples.size());
  EXPECT_EQ(r.sample_rate, 16000);
  for (std::size_t i = 0; i < w.samples.size(); ++i) ASSERT_NEAR(r.samples[i], w.samples[i], 1.0 / 32768.0);
  EXPECT_THROW(decode_wav("RIFF\x04\x00\x00\x00WAVE"), Error);
}

TEST(Resample, PreservesToneFrequency) {
  const auto w = resample(fixtures::sine(440.0, 1.0, 22050), 16000);
  EXPECT_EQ(w.sample_rate, 16000);
  EXPECT_NEAR(static_cast<double>(w.samples.size()), 16000.0, 2.0);
  const auto f0 = median_voiced_f0(estimate_f0(w, 60.0, 1600.0));
  ASSERT_TRUE(f0);
  EXPECT_NEAR(*f0, 440.0, 440.0 * 0.01);
}

class F0Tones : public ::testing::TestWithParam<double> {};

TEST_P(F0Tones, MedianWithinOnePercent) {
  const double hz = GetParam();
  const auto f0 = median_voiced_f0(estimate_f0(fixtures::sine(hz, 0.6), 60.0, 1600.0));
  ASSERT_TRUE(f0);
  EXPECT_NEAR(*f0, hz, hz * 0.01);
}

INSTANTIATE_TEST_SUITE_P(Range, F0Tones, ::testing::Values(110.0, 220.0, 300.0, 700.0, 1200.0));

TEST(F0, SilenceIsUnvoiced) {
  Waveform s;
  s.samples.assign(8000, 0.0);
  const auto track = estimate_f0(s, 60.0, 1600.0);
  EXPECT_FALSE(median_voiced_f0(track));
  for (bool v : track.voiced) EXPECT_FALSE(v);
}

TEST(F0, HarmonicVowelTracksFundamental) {
  const auto f0 = median_voiced_f0(estimate_f0(fixtures::vowel(220.0, 0.8, {700, 1200, 2600}), 60.0, 1600.0));
  ASSERT_TRUE(f0);
  EXPECT_NEAR(*f0, 220.0, 220.0 * 0.02);
}

TEST(F0, LogStatsOverVoicedFrames) {
  F0Track t;
  t.f0 = {100.0, 0.0, 400.0};
  t.voiced = {true, false, true};
  const F0Track tracks[] = {t};
  const auto s = fit_log_f0(tracks);
  EXPECT_EQ(s.frames, 2u);
  EXPECT_NEAR(s.mean, 0.5 * (std::log(100.0) + std::log(400.0)), 1e-12);
  EXPECT_NEAR(s.std, 0.5 * (std::log(400.0) - std::log(100.0)), 1e-12);
}

TEST(Features, FileRoundTripAndHeader) {
  TempDir dir("feat");
  FeatureSequence seq;
  seq.frames = Matrix::Random(7, 5);
  seq.kind = FeatureKind::mcc;
  seq.config_hash = 0x1234abcd5678ef00ULL;
  const auto bytes = encode_features(seq);
  EXPECT_EQ(bytes.size(), kFeatureHeaderBytes + 7 * 5 * 4);
  write_features(dir / "x.feat", seq);
  const auto back = read_features(dir / "x.feat");
  EXPECT_EQ(back.kind, FeatureKind::mcc);
  EXPECT_EQ(back.config_hash, seq.config_hash);
  EXPECT_NEAR(back.frame_hop, seq.frame_hop, 1e-6);
  EXPECT_LT((back.frames - seq.frames).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_THROW(decode_features(bytes.substr(0, bytes.size() - 1)), Error);
}

TEST(Features, NormalizationRoundTripAndFlooring) {
  FeatureSequence a;
  a.frames = Matrix::Random(50, 4);
  a.frames.col(2).setConstant(3.0);  // zero variance
  const FeatureSequence data[] = {a};
  std::vector<int> floored;
  const auto stats = fit_norm(data, "global", &floored);
  EXPECT_EQ(floored, std::vector<int>{2});
  const auto n = apply_norm(stats, a);
  EXPECT_LT(n.frames.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((invert_norm(stats, n).frames - a.frames).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mcc, EnvelopeRoundTripIsClose) {
  const auto cfg = fixtures::toy_analysis();
  const auto w = fixtures::vowel(180.0, 0.5, {600, 1300, 2500});
  const auto a = analyze_source_filter(w, cfg);
  const Matrix env = envelope_from_mcc(a.mcc, cfg.stft.n_fft);
  ASSERT_EQ(env.rows(), a.envelope.rows());
  // Truncated cepstra smooth the envelope; compare in dB away from the edges.
  const Matrix diff = (10.0 * (env.array().log10() - a.envelope.array().log10())).matrix();
  const double mean_abs = diff.middleCols(16, 400).cwiseAbs().mean();
  EXPECT_LT(mean_abs, 3.0);
}

TEST(Mcc, WarpingIsMonotoneAndFixesEndpoints) {
  EXPECT_NEAR(warp_frequency(0.0, 0.42), 0.0, 1e-12);
  EXPECT_NEAR(warp_frequency(kPi, 0.42), kPi, 1e-12);
  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double v = warp_frequency(kPi * i / 100, 0.42);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(Analysis, ConfigJsonRoundTripPreservesHash) {
  auto cfg = fixtures::toy_analysis();
  EXPECT_EQ(AnalysisConfig::from_json(cfg.to_json()).hash(), cfg.hash());
  auto other = cfg;
  other.n_mels = 30;
  EXPECT_NE(other.hash(), cfg.hash());
}
