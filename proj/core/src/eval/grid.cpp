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
#include <spdlog/spdlog.h>

#include "dogvc/convert.hpp"
#include "dogvc/dsp/mel.hpp"
#include "dogvc/eval.hpp"

namespace dogvc::eval {

namespace fs = std::filesystem;

std::string to_string(GridKind k) { return k == GridKind::exp1 ? "exp1" : "exp2"; }

GridKind parse_grid(const std::string& s) {
  if (s == "exp1") return GridKind::exp1;
  if (s == "exp2") return GridKind::exp2;
  throw Error("unknown grid '" + s + "' (expected exp1 or exp2)");
}

ExperimentGrid experiment1_grid() {
  using train::Method;
  using dsp::FeatureKind;
  ExperimentGrid g;
  g.kind = GridKind::exp1;
  g.cells = {{"stargan-mcc", "StarGAN-VC (MCC)", Method::stargan, FeatureKind::mcc, 0},
             {"stargan-melspec", "StarGAN-VC (melspec)", Method::stargan, FeatureKind::melspec, 0},
             {"acvae-mcc", "ACVAE-VC (MCC)", Method::acvae, FeatureKind::mcc, 0},
             {"acvae-melspec", "ACVAE-VC (melspec)", Method::acvae, FeatureKind::melspec, 0}};
  return g;
}

ExperimentGrid experiment2_grid(train::Method method, dsp::FeatureKind features) {
  ExperimentGrid g;
  g.kind = GridKind::exp2;
  for (int delta : {2, 1, 0, -1, -2}) {
    GridCell c;
    c.condition = fmt::format("delta{:+d}", delta);
    c.label = delta == 0 ? "k_d" : fmt::format("k_d {:+d}", delta);
    c.method = method;
    c.features = features;
    c.kernel_delta = delta;
    g.cells.push_back(c);
  }
  return g;
}

dsp::Waveform white_noise(double seconds, int sample_rate, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
  dsp::Waveform w{std::vector<double>(n), sample_rate};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::pow(10.0, -20.0 / 20.0));
  for (double& v : w.samples) v = std::clamp(normal(rng), -1.0, 1.0);
  return w;
}

namespace {

Matrix log_mel(const dsp::Waveform& w, const dsp::AnalysisConfig& cfg) {
  const dsp::Waveform x = w.sample_rate == cfg.sample_rate ? w : dsp::resample(w, cfg.sample_rate);
  return dsp::mel_spectrogram(x, cfg.mel()).frames;
}

Vector centroid(const Matrix& m) { return m.colwise().mean().transpose(); }

}  // namespace

double mel_l1(const dsp::Waveform& a, const dsp::Waveform& b, const dsp::AnalysisConfig& cfg) {
  const Matrix ma = log_mel(a, cfg), mb = log_mel(b, cfg);
  const Eigen::Index t = std::min(ma.rows(), mb.rows());
  return (ma.topRows(t) - mb.topRows(t)).cwiseAbs().mean();
}

namespace {

// Published listening-test figures, used as a comparison column.
struct Published {
  std::array<double, 3> mos;
  std::optional<std::array<double, 2>> cer;
};

std::optional<Published> published(GridKind kind, const std::string& condition) {
  using P = Published;
  using C = std::array<double, 2>;
  static const std::map<std::string, P> exp1 = {
      {"stargan-mcc", P{{1.20, 1.28, 0.92}, C{1.00, 1.00}}},
      {"stargan-melspec", P{{4.20, 2.76, 2.04}, C{0.97, 0.95}}},
      {"acvae-mcc", P{{2.04, 2.24, 1.76}, C{0.97, 0.94}}},
      {"acvae-melspec", P{{4.24, 2.36, 1.36}, C{0.98, 0.97}}},
      {"FKN-original", P{{1.00, 4.80, 5.00}, C{0.03, 0.02}}},
      {"adult_dog-original", P{{5.00, 3.70, 1.00}, std::nullopt}},
      {"white-noise", P{{1.10, 1.20, 1.00}, std::nullopt}},
  };
  static const std::map<std::string, P> exp2 = {
      {"delta+2", P{{2.20, 2.40, 2.00}, C{0.93, 0.89}}},
      {"delta+1", P{{2.40, 2.08, 2.12}, C{0.95, 0.92}}},
      {"delta+0", P{{2.60, 2.80, 2.60}, C{0.97, 0.95}}},
      {"delta-1", P{{2.28, 2.28, 3.00}, C{0.83, 0.80}}},
      {"delta-2", P{{2.60, 2.48, 2.88}, C{0.87, 0.76}}},
      {"FKN-original", P{{1.00, 4.70, 5.00}, C{0.03, 0.02}}},
      {"adult_dog-original", P{{5.00, 3.20, 1.00}, std::nullopt}},
      {"white-noise", P{{1.10, 1.00, 1.00}, std::nullopt}},
  };
  const auto& table = kind == GridKind::exp1 ? exp1 : exp2;
  const auto it = table.find(condition);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::vector<corpus::AudioClip> first_eval_clips(const corpus::Manifest& m, const std::string& domain, int count) {
  auto clips = m.clips_in(domain, corpus::Split::eval);
  std::sort(clips.begin(), clips.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  if (static_cast<int>(clips.size()) > count) clips.resize(static_cast<std::size_t>(count));
  return clips;
}

struct Sentence {
  std::string reference;
  dsp::Waveform source;
};

}  // namespace

GridResult run_grid(const ExperimentGrid& grid, const EvalInputs& in) {
  const auto& analysis = in.analysis;
  const auto loader = in.loader ? in.loader : corpus::disk_loader(analysis.sample_rate);
  const auto src_clips = first_eval_clips(in.manifest, grid.source, in.sentences);
  const auto tgt_clips = first_eval_clips(in.manifest, grid.target, in.sentences);
  if (src_clips.empty()) throw Error("no evaluation clips for source domain " + grid.source);
  if (static_cast<int>(src_clips.size()) < in.sentences) {
    spdlog::warn("only {} evaluation clips for {}", src_clips.size(), grid.source);
  }

  std::vector<Sentence> sentences;
  for (const auto& c : src_clips) {
    const auto ref = in.references.find(c.id);
    sentences.push_back({ref == in.references.end() ? std::string() : ref->second, loader(c)});
  }
  std::vector<dsp::Waveform> targets;
  for (const auto& c : tgt_clips) targets.push_back(loader(c));
  std::optional<Vector> target_centroid;
  if (!targets.empty()) {
    Vector acc = Vector::Zero(analysis.n_mels);
    for (const auto& w : targets) acc += centroid(log_mel(w, analysis));
    target_centroid = acc / static_cast<double>(targets.size());
  }

  std::optional<convert::NeuralVocoder> vocoder;
  if (in.vocoder) vocoder.emplace(convert::NeuralVocoder::load(*in.vocoder));

  GridResult result;
  auto& report = result.report;
  report.kind = grid.kind;
  report.source = grid.source;
  report.target = grid.target;
  auto& exp = result.experiment;
  exp.id = to_string(grid.kind);

  // Objective metrics and listening clips for one condition's outputs.
  auto add_outputs = [&](ReportRow& row, const std::vector<dsp::Waveform>& outputs) {
    double l1 = 0.0, dist = 0.0, f0 = 0.0;
    int voiced = 0;
    for (std::size_t k = 0; k < outputs.size(); ++k) {
      const auto& w = outputs[k];
      const fs::path rel = fs::path(row.condition) / fmt::format("s{}.wav", k + 1);
      if (k < sentences.size()) l1 += mel_l1(w, sentences[k].source, analysis);
      if (target_centroid) dist += (centroid(log_mel(w, analysis)) - *target_centroid).norm() / std::sqrt(analysis.n_mels);
      if (const auto med = dsp::median_voiced_f0(dsp::estimate_f0(w, analysis.f0()))) {
        f0 += *med;
        ++voiced;
      }
      if (!fs::exists(in.out_dir / rel)) write_file_atomic(in.out_dir / rel, dsp::encode_wav(w));
      exp.clips.push_back({row.condition + "-s" + std::to_string(k + 1), rel.generic_string(), row.condition,
                           k < sentences.size() ? sentences[k].reference : std::string(), static_cast<int>(k)});
    }
    const double n = static_cast<double>(outputs.size());
    row.objective["mel_l1_to_source"] = l1 / n;
    if (target_centroid) row.objective["mel_dist_to_target"] = dist / n;
    if (voiced) row.objective["median_f0_hz"] = f0 / voiced;
  };

  for (const auto& cell : grid.cells) {
    ReportRow row;
    row.condition = cell.condition;
    row.label = cell.label;
    if (grid.kind == GridKind::exp2) row.kernel_delta = cell.kernel_delta;
    const fs::path run = in.rundir / cell.condition;
    const fs::path ckpt = run / "checkpoints" / "latest.ckpt";
    if (!fs::exists(ckpt)) {
      row.missing = true;
      if (!in.base_arch.specs(nets::Role::discriminator).empty()) {
        const auto arch = nets::build_with_kernel_delta(in.base_arch, cell.kernel_delta);
        row.receptive_field = nets::receptive_field(arch, nets::Role::discriminator);
        row.classifier_receptive_field = nets::receptive_field(arch, nets::Role::classifier);
      }
      report.rows.push_back(std::move(row));
      continue;
    }
    const auto model = train::load_model(ckpt);
    if (model.meta.method != cell.method || model.meta.feature_kind != cell.features ||
        model.meta.kernel_delta != cell.kernel_delta) {
      throw Error(fmt::format("{} was trained as {} {} delta {}, the grid expects {} {} delta {}", run.string(),
                              train::to_string(model.meta.method), dsp::to_string(model.meta.feature_kind),
                              model.meta.kernel_delta, train::to_string(cell.method), dsp::to_string(cell.features),
                              cell.kernel_delta));
    }
    const auto arch = nets::parse_architecture(model.meta.arch_text);
    if (!arch.specs(nets::Role::discriminator).empty()) {
      row.receptive_field = nets::receptive_field(arch, nets::Role::discriminator);
      row.classifier_receptive_field = nets::receptive_field(arch, nets::Role::classifier);
    }
    row.config_hash = fs::exists(run / "config.json") ? hex64(hash64(read_file(run / "config.json")))
                                                      : hex64(hash64(model.meta.to_json()));
    convert::ConversionRequest req;
    req.source = grid.source;
    req.target = grid.target;
    req.checkpoint = ckpt;
    req.seed = grid.seed;
    req.backend = cell.features == dsp::FeatureKind::mcc
                      ? convert::BackendKind::source_filter
                      : (vocoder ? convert::BackendKind::neural : convert::BackendKind::phase_recon);
    req.vocoder = in.vocoder;
    std::vector<dsp::Waveform> outputs;
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      auto res = convert::convert_waveform(sentences[k].source, model, req, vocoder ? &*vocoder : nullptr);
      const fs::path out = in.out_dir / cell.condition / fmt::format("s{}.wav", k + 1);
      convert::write_result(out, res);
      outputs.push_back(std::move(res.audio));
    }
    add_outputs(row, outputs);
    report.rows.push_back(std::move(row));
  }

  // Controls: unconverted source and target speech and white noise.
  {
    ReportRow row;
    row.condition = grid.source + "-original";
    row.label = grid.source + " (original)";
    row.control = true;
    std::vector<dsp::Waveform> outs;
    for (const auto& s : sentences) outs.push_back(s.source);
    add_outputs(row, outs);
    report.rows.push_back(std::move(row));
  }
  if (!targets.empty()) {
    ReportRow row;
    row.condition = grid.target + "-original";
    row.label = (grid.target == "adult_dog" ? std::string("Adult Dog") : grid.target) + " (original)";
    row.control = true;
    add_outputs(row, targets);
    // The target originals say different things; their references stay empty.
    for (auto& c : exp.clips) {
      if (c.condition == row.condition) c.reference_text.clear();
    }
    report.rows.push_back(std::move(row));
  }
  {
    ReportRow row;
    row.condition = "white-noise";
    row.label = "White Noise";
    row.control = true;
    std::vector<dsp::Waveform> outs;
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      outs.push_back(white_noise(sentences[k].source.duration(), analysis.sample_rate, grid.seed + k));
    }
    add_outputs(row, outs);
    for (auto& c : exp.clips) {
      if (c.condition == row.condition) c.reference_text.clear();
    }
    report.rows.push_back(std::move(row));
  }

  // Listening data, when present.
  const auto mos = aggregate_mos(in.ratings, [&](const RatingRecord& r) { return exp.find(r.clip).condition; });
  const auto cers = aggregate_cer(exp, in.transcripts);
  for (auto& row : report.rows) {
    for (std::size_t s = 0; s < kAllScales.size(); ++s) {
      const auto it = mos.find({row.condition, kAllScales[s]});
      if (it != mos.end()) row.mos[s] = it->second;
    }
    for (int k = 0; k < 2; ++k) {
      const auto it = cers.find({row.condition, k});
      if (it != cers.end()) row.cer[static_cast<std::size_t>(k)] = it->second;
    }
    const std::string key = row.control && row.condition.rfind(grid.source, 0) == 0 ? "FKN-original"
                            : row.control && row.condition.rfind(grid.target, 0) == 0 ? "adult_dog-original"
                                                                                       : row.condition;
    if (const auto p = published(grid.kind, key)) {
      for (std::size_t s = 0; s < 3; ++s) row.published_mos[s] = p->mos[s];
      if (p->cer) {
        row.published_cer[0] = (*p->cer)[0];
        row.published_cer[1] = (*p->cer)[1];
      }
    }
  }
  write_file_atomic(in.out_dir / "experiment.json", exp.to_json() + "\n");
  return result;
}

GridResult run_experiment1(const EvalInputs& inputs) { return run_grid(experiment1_grid(), inputs); }

GridResult run_experiment2(const EvalInputs& inputs, train::Method method, dsp::FeatureKind features) {
  return run_grid(experiment2_grid(method, features), inputs);
}

}  // namespace dogvc::eval
