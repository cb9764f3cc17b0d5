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
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dogvc/dsp/analysis.hpp"
#include "dogvc/nets/layers.hpp"
#include "dogvc/train.hpp"

namespace dogvc::convert {

enum class BackendKind { source_filter, neural, phase_recon };
std::string to_string(BackendKind k);
BackendKind parse_backend(const std::string& s);
/// mcc pairs with source_filter; melspec with neural or phase_recon.
bool compatible(BackendKind backend, dsp::FeatureKind features);

// ---------------------------------------------------------------------------
// Feature conversion

/// Runs the trained model on normalized features. ACVAE decodes the
/// posterior mean under the target label; StarGAN applies the generator.
dsp::FeatureSequence convert_features(const train::TrainedModel& model, const dsp::FeatureSequence& x, int src,
                                      int tgt);

/// Voiced frames: exp((log f0 - mu_src) / sd_src * sd_tgt + mu_tgt).
dsp::F0Track transform_f0(const dsp::F0Track& f0, const dsp::LogF0Stats& src, const dsp::LogF0Stats& tgt);

// ---------------------------------------------------------------------------
// Source-filter synthesis

struct SynthesisConfig {
  int sample_rate = 16000;
  dsp::StftConfig stft;
  std::uint64_t seed = 0;
  double peak = 0.99;
};

/// Pulse/noise excitation mixed per aperiodicity band and shaped frame by
/// frame with the square root of `envelope` (T x bins power).
dsp::Waveform synthesize_from_envelope(const Matrix& envelope, const dsp::F0Track& f0,
                                       const dsp::BandAperiodicity& ap, const SynthesisConfig& cfg);
dsp::Waveform synthesize_source_filter(const dsp::FeatureSequence& mcc, const dsp::F0Track& f0,
                                       const dsp::BandAperiodicity& ap, const SynthesisConfig& cfg);

/// Scales down so that max |x| <= peak; quieter signals are left alone.
void limit_peak(dsp::Waveform& w, double peak);

// ---------------------------------------------------------------------------
// Mel inversion

/// min ||A x - b|| subject to x >= 0 (Lawson-Hanson active set).
Vector nnls(const Matrix& a, const Vector& b, int max_iterations = 0);

/// Per-frame NNLS of exp(log-mel) against the filterbank: T x bins power.
Matrix mel_to_power(const Matrix& log_mel, const Matrix& filterbank);

struct GriffinLimConfig {
  int iterations = 60;
  std::uint64_t seed = 0;
};

/// Iterative phase reconstruction from a T x bins magnitude.
std::vector<double> griffin_lim(const Matrix& magnitude, const dsp::StftConfig& stft, const GriffinLimConfig& cfg);

/// Mel -> NNLS power -> Griffin-Lim.
dsp::Waveform phase_reconstruct(const dsp::FeatureSequence& mel, const dsp::AnalysisConfig& analysis,
                                const GriffinLimConfig& gl = {});

/// Learned log-mel -> log-power mapping (a small 1-D conv net), refined to
/// agree with the input mel bands and inverted with Griffin-Lim.
class NeuralVocoder {
 public:
  struct Options {
    int hidden = 64;
    int kernel = 5;
    int steps = 300;
    int batch = 4;
    int crop_frames = 32;
    double lr = 2e-3;
    int refine_iterations = 30;
    std::uint64_t seed = 0;
    GriffinLimConfig gl;
  };

  NeuralVocoder(const dsp::AnalysisConfig& analysis, const Options& opts);

  /// Fits on waveforms at the analysis rate. Returns the final L1 loss.
  double fit(const std::vector<dsp::Waveform>& clips);
  /// Predicted T x bins power for a log-mel sequence.
  Matrix predict_power(const Matrix& log_mel) const;
  dsp::Waveform synthesize(const dsp::FeatureSequence& mel) const;

  void save(const std::filesystem::path& path) const;
  static NeuralVocoder load(const std::filesystem::path& path);

  const dsp::AnalysisConfig& analysis() const { return analysis_; }
  int n_mels() const { return analysis_.n_mels; }

  struct Net;

 private:
  dsp::AnalysisConfig analysis_;
  Options opts_;
  std::shared_ptr<Net> net_;
};

// ---------------------------------------------------------------------------
// End-to-end

struct ConversionRequest {
  std::filesystem::path input;
  std::string source;  // domain names from the checkpoint's label set
  std::string target;
  std::filesystem::path checkpoint;
  BackendKind backend = BackendKind::phase_recon;
  std::optional<std::filesystem::path> vocoder;  // neural backend weights
  std::uint64_t seed = 0;
};

struct Provenance {
  std::string input_sha256;
  std::string checkpoint_sha256;
  std::string vocoder_sha256;
  std::string method;
  std::string features;
  std::string backend;
  std::string source;
  std::string target;
  std::string analysis_hash;
  std::string arch_hash;
  int kernel_delta = 0;
  std::uint64_t checkpoint_step = 0;
  std::uint64_t seed = 0;
  int gl_iterations = 0;

  std::string to_json() const;
  static Provenance from_json(const std::string& text);
  bool operator==(const Provenance&) const = default;
};

struct ConversionResult {
  dsp::Waveform audio;
  Provenance provenance;
};

/// Loads the checkpoint, converts `waveform` and synthesizes. Errors carry
/// the failing stage as a prefix ("analysis: ...").
ConversionResult convert_waveform(const dsp::Waveform& waveform, const train::LoadedModel& model,
                                  const ConversionRequest& req, const NeuralVocoder* vocoder = nullptr);
ConversionResult convert_file(const ConversionRequest& req);

/// Writes the WAV and `<out>.json` provenance.
void write_result(const std::filesystem::path& out, const ConversionResult& result);

}  // namespace dogvc::convert
