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

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dogvc/corpus.hpp"
#include "dogvc/dsp/analysis.hpp"
#include "dogvc/nets/architecture.hpp"
#include "dogvc/train.hpp"

namespace dogvc::eval {

// ---------------------------------------------------------------------------
// Character error rate

struct EditStats {
  int deletions = 0;
  int substitutions = 0;
  int insertions = 0;
  int ref_length = 0;

  int distance() const { return deletions + substitutions + insertions; }
  bool operator==(const EditStats&) const = default;
};

/// Unit-cost alignment over code points. Among minimal alignments the
/// backtrace prefers substitutions, then deletions, then insertions.
EditStats edit_stats(std::u32string_view ref, std::u32string_view hyp);
/// UTF-8 overload without normalization.
EditStats edit_stats(std::string_view ref, std::string_view hyp);

struct TextNormalization {
  bool nfkc = true;
  bool strip_whitespace = true;
  bool strip_punctuation = true;
  bool lowercase = true;
};

/// Decodes UTF-8 (throws on malformed input) and applies the normalization.
std::u32string normalize_text(std::string_view utf8, const TextNormalization& norm = {});
std::u32string utf8_to_u32(std::string_view utf8);

/// (D + S + I) / N after normalization. Throws when the normalized
/// reference is empty.
double cer(std::string_view ref, std::string_view hyp, const TextNormalization& norm = {});
double cer(const EditStats& stats);

// ---------------------------------------------------------------------------
// Listening-test records

enum class MosScale { dog_likeness, sound_quality, clarity };
inline constexpr std::array<MosScale, 3> kAllScales = {MosScale::dog_likeness, MosScale::sound_quality,
                                                       MosScale::clarity};
std::string to_string(MosScale s);
MosScale parse_scale(const std::string& s);

struct RatingRecord {
  std::string rater;
  std::string clip;
  MosScale scale = MosScale::dog_likeness;
  int score = 0;  // 1..5
  std::int64_t timestamp = 0;

  void validate() const;
  std::string to_json() const;
  static RatingRecord from_json(const std::string& line);
};

struct TranscriptRecord {
  std::string rater;
  std::string clip;
  std::string text;  // may be empty
  std::string reference_id;
  std::int64_t timestamp = 0;

  std::string to_json() const;
  static TranscriptRecord from_json(const std::string& line);
};

struct MosSummary {
  double mean = 0.0;
  double sd = 0.0;        // sample standard deviation (0 for n = 1)
  double ci95 = 0.0;      // half-width, 1.96 sd / sqrt(n)
  int n = 0;
};

using MosTable = std::map<std::pair<std::string, MosScale>, MosSummary>;

/// Mean per (group, scale); groups without ratings do not appear.
MosTable aggregate_mos(const std::vector<RatingRecord>& ratings,
                       const std::function<std::string(const RatingRecord&)>& group_of);

// ---------------------------------------------------------------------------
// Listening experiment definition (consumed by the listening service)

struct ListeningClip {
  std::string id;
  std::filesystem::path path;  // relative to the experiment file
  std::string condition;
  std::string reference_text;
  int sentence = 0;  // 0 = first evaluation sentence, 1 = second
};

struct ListeningExperiment {
  std::string id;
  std::vector<ListeningClip> clips;

  std::vector<std::string> conditions() const;  // sorted, unique
  const ListeningClip& find(const std::string& clip_id) const;
  std::string to_json() const;
  static ListeningExperiment from_json(const std::string& text);
};

/// Mean CER over transcripts per (condition, sentence).
std::map<std::pair<std::string, int>, double> aggregate_cer(const ListeningExperiment& exp,
                                                            const std::vector<TranscriptRecord>& transcripts,
                                                            const TextNormalization& norm = {});

// ---------------------------------------------------------------------------
// Experiment grids

enum class GridKind { exp1, exp2 };
std::string to_string(GridKind k);
GridKind parse_grid(const std::string& s);

struct GridCell {
  std::string condition;  // also the run directory name
  std::string label;      // table row label
  train::Method method = train::Method::stargan;
  dsp::FeatureKind features = dsp::FeatureKind::melspec;
  int kernel_delta = 0;
};

struct ExperimentGrid {
  GridKind kind = GridKind::exp1;
  std::vector<GridCell> cells;
  std::string source = "FKN";
  std::string target = "adult_dog";
  std::uint64_t seed = 0;
};

/// stargan/acvae x mcc/melspec.
ExperimentGrid experiment1_grid();
/// Kernel deltas +2..-2 for one method and feature kind.
ExperimentGrid experiment2_grid(train::Method method = train::Method::stargan,
                                dsp::FeatureKind features = dsp::FeatureKind::melspec);

struct ReportRow {
  std::string condition;
  std::string label;
  bool control = false;
  bool missing = false;  // cell not trained
  std::optional<int> kernel_delta;
  std::optional<int> receptive_field;             // discriminator
  std::optional<int> classifier_receptive_field;
  std::string config_hash;
  std::map<std::string, double> objective;
  std::array<std::optional<MosSummary>, 3> mos;
  std::array<std::optional<double>, 2> cer;
  std::array<std::optional<double>, 3> published_mos;
  std::array<std::optional<double>, 2> published_cer;
};

struct Report {
  GridKind kind = GridKind::exp1;
  std::string source;
  std::string target;
  std::vector<ReportRow> rows;

  std::string to_markdown() const;
  std::string to_csv() const;
};

struct EvalInputs {
  corpus::Manifest manifest;
  std::filesystem::path rundir;   // one sub-directory per cell condition
  std::filesystem::path out_dir;  // converted audio, experiment.json
  std::optional<std::filesystem::path> vocoder;
  nets::NetworkConfig base_arch;  // receptive fields of untrained cells
  std::map<std::string, std::string> references;  // clip id -> transcript
  std::vector<RatingRecord> ratings;
  std::vector<TranscriptRecord> transcripts;
  corpus::AudioLoader loader;  // defaults to disk
  int sentences = 2;
  dsp::AnalysisConfig analysis;  // for objective re-analysis
};

struct GridResult {
  Report report;
  ListeningExperiment experiment;
};

/// Converts the first `sentences` evaluation clips of the source domain with
/// every trained cell, adds the control conditions, computes objective
/// metrics and folds in listening data when present.
GridResult run_grid(const ExperimentGrid& grid, const EvalInputs& inputs);

/// The method/feature comparison and the discriminator kernel sweep.
GridResult run_experiment1(const EvalInputs& inputs);
GridResult run_experiment2(const EvalInputs& inputs, train::Method method = train::Method::stargan,
                           dsp::FeatureKind features = dsp::FeatureKind::melspec);

/// Deterministic white noise at -20 dBFS RMS.
dsp::Waveform white_noise(double seconds, int sample_rate, std::uint64_t seed);

/// Frame-aligned mean absolute log-mel difference.
double mel_l1(const dsp::Waveform& a, const dsp::Waveform& b, const dsp::AnalysisConfig& cfg);

}  // namespace dogvc::eval
