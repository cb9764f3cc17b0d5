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

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dogvc/convert.hpp"
#include "dogvc/dsp/analysis.hpp"

using namespace dogvc;

namespace {

dsp::Waveform chirp(double seconds) {
  dsp::Waveform w;
  w.samples.resize(static_cast<std::size_t>(seconds * w.sample_rate));
  double phase = 0.0;
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    const double hz = 150.0 + 300.0 * static_cast<double>(i) / w.samples.size();
    phase += 2.0 * std::numbers::pi * hz / w.sample_rate;
    w.samples[i] = 0.3 * std::sin(phase) + 0.1 * std::sin(3.0 * phase);
  }
  return w;
}

void BM_MelSpectrogram(benchmark::State& state) {
  const auto w = chirp(static_cast<double>(state.range(0)));
  const dsp::AnalysisConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(dsp::extract_features(w, dsp::FeatureKind::melspec, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.samples.size()));
}
BENCHMARK(BM_MelSpectrogram)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_F0(benchmark::State& state) {
  const auto w = chirp(2.0);
  const dsp::AnalysisConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(dsp::estimate_f0(w, cfg.f0()));
}
BENCHMARK(BM_F0)->Unit(benchmark::kMillisecond);

void BM_SourceFilterAnalysis(benchmark::State& state) {
  const auto w = chirp(1.0);
  const dsp::AnalysisConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(dsp::analyze_source_filter(w, cfg));
}
BENCHMARK(BM_SourceFilterAnalysis)->Unit(benchmark::kMillisecond);

void BM_SourceFilterSynthesis(benchmark::State& state) {
  const dsp::AnalysisConfig cfg;
  const auto a = dsp::analyze_source_filter(chirp(1.0), cfg);
  convert::SynthesisConfig syn;
  syn.stft = cfg.stft;
  for (auto _ : state) benchmark::DoNotOptimize(convert::synthesize_source_filter(a.mcc, a.f0, a.aperiodicity, syn));
}
BENCHMARK(BM_SourceFilterSynthesis)->Unit(benchmark::kMillisecond);

void BM_PhaseReconstruction(benchmark::State& state) {
  const dsp::AnalysisConfig cfg;
  const auto mel = dsp::extract_features(chirp(1.0), dsp::FeatureKind::melspec, cfg);
  convert::GriffinLimConfig gl;
  gl.iterations = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(convert::phase_reconstruct(mel, cfg, gl));
}
BENCHMARK(BM_PhaseReconstruction)->Arg(10)->Arg(60)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
