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

// dogvc: corpus curation, feature extraction, training, conversion,
// evaluation and the listening-test server.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "dogvc/convert.hpp"
#include "dogvc/corpus.hpp"
#include "dogvc/dsp/analysis.hpp"
#include "dogvc/eval.hpp"
#include "dogvc/listen.hpp"
#include "dogvc/train.hpp"

namespace fs = std::filesystem;
using namespace dogvc;

namespace {

dsp::AnalysisConfig load_analysis(const std::optional<fs::path>& path) {
  return path ? dsp::AnalysisConfig::from_json(read_file(*path)) : dsp::AnalysisConfig{};
}

nets::NetworkConfig load_arch(const fs::path& path) { return nets::load_architecture(path); }

corpus::DomainSet load_domains(const std::optional<fs::path>& path) {
  return path ? corpus::DomainSet::from_json(read_file(*path)) : corpus::DomainSet::default_six();
}

// --- curate -----------------------------------------------------------------

struct CurateArgs {
  fs::path in;
  std::string domain;
  corpus::CurationThresholds thresholds;
  fs::path out;
  int rate = 16000;
  std::optional<fs::path> resampled_dir;
  std::string license;
  std::string high_domain;  // pitch split: clips above the threshold go here
  double pitch_threshold = corpus::kDefaultPitchThresholdHz;
};

int run_curate(const CurateArgs& a) {
  corpus::IngestOptions opts;
  opts.project_rate = a.rate;
  opts.resampled_dir = a.resampled_dir;
  opts.license_tag = a.license;
  const auto ingest = corpus::ingest_directory(a.in, a.domain, opts);
  for (const auto& s : ingest.skipped) spdlog::warn("skipped {}: {}", s.path.string(), s.reason);

  const auto loader = corpus::disk_loader(a.rate);
  const auto result = corpus::curate(ingest.clips, a.thresholds, loader);
  for (const auto& r : result.rejected) {
    spdlog::info("rejected {} ({}): level {:.1f} dBFS, snr {:.1f} dB", r.clip.id, corpus::to_string(r.reason),
                 r.level_db, r.snr_db);
  }
  std::vector<corpus::AudioClip> kept = result.kept;
  if (!a.high_domain.empty()) {
    const auto split = corpus::split_by_pitch(kept, a.pitch_threshold, loader);
    kept = split.low_pitch;
    for (auto c : split.high_pitch) {
      c.domain = a.high_domain;
      kept.push_back(std::move(c));
    }
    spdlog::info("pitch split at {} Hz: {} {}, {} {} ({} unvoiced)", a.pitch_threshold, split.low_pitch.size(),
                 a.domain, split.high_pitch.size(), a.high_domain, split.unvoiced.size());
  }

  // Merge into an existing manifest, replacing the domains just curated.
  corpus::Manifest m;
  if (fs::exists(a.out)) m = corpus::read_manifest(a.out);
  std::erase_if(m.clips, [&](const corpus::AudioClip& c) {
    const bool replaced = c.domain == a.domain || (!a.high_domain.empty() && c.domain == a.high_domain);
    if (replaced) m.split.erase(c.id);
    return replaced;
  });
  for (auto& c : kept) {
    m.split[c.id] = corpus::Split::train;
    m.clips.push_back(std::move(c));
  }
  corpus::write_manifest(a.out, m);
  fmt::print("{}: kept {} of {} clips ({} rejected, {} skipped)\n", a.out.string(), result.kept.size(),
             ingest.clips.size(), result.rejected.size(), ingest.skipped.size());
  return 0;
}

// --- split / extract ----------------------------------------------------------

int run_split(const fs::path& manifest, const std::optional<fs::path>& out, int n_eval, std::uint64_t seed) {
  const auto m = corpus::make_split(corpus::read_manifest(manifest), n_eval, seed);
  corpus::write_manifest(out.value_or(manifest), m);
  std::size_t eval = 0;
  for (const auto& [id, s] : m.split) eval += s == corpus::Split::eval;
  fmt::print("{} eval, {} train\n", eval, m.split.size() - eval);
  return 0;
}

int run_extract(const fs::path& manifest_path, const std::string& kind_name, const fs::path& out,
                const std::optional<fs::path>& analysis_path) {
  const auto kind = dsp::parse_feature_kind(kind_name);
  if (kind == dsp::FeatureKind::f0) throw Error("f0 tracks are written alongside melspec or mcc features");
  const auto analysis = load_analysis(analysis_path);
  const auto manifest = corpus::read_manifest(manifest_path);
  fs::create_directories(out);
  const fs::path cfg_path = out / dsp::kAnalysisFileName;
  if (fs::exists(cfg_path) && dsp::AnalysisConfig::from_json(read_file(cfg_path)).hash() != analysis.hash()) {
    throw Error(cfg_path.string() + " holds a different analysis configuration; use a fresh directory");
  }
  write_file_atomic(cfg_path, analysis.to_json());
  const auto loader = corpus::disk_loader(analysis.sample_rate);
  int done = 0;
  for (const auto& clip : manifest.clips) {
    const auto w = loader(clip);
    dsp::write_features(dsp::feature_path(out, clip.id, kind), dsp::extract_features(w, kind, analysis));
    const auto f0 = dsp::estimate_f0(w, analysis.f0());
    dsp::write_features(dsp::feature_path(out, clip.id, dsp::FeatureKind::f0), dsp::f0_as_features(f0, analysis));
    if (++done % 50 == 0) spdlog::info("{} / {} clips", done, manifest.clips.size());
  }
  fmt::print("extracted {} {} sequences into {}\n", done, kind_name, out.string());
  return 0;
}

// --- train ----------------------------------------------------------------------

struct TrainArgs {
  std::optional<fs::path> config;
  std::optional<std::string> method;
  std::optional<std::string> features;
  std::optional<int> kernel_delta;
  std::optional<int> steps;
  std::optional<std::uint64_t> seed;
  fs::path manifest;
  fs::path featdir;
  fs::path arch;
  std::optional<fs::path> domains;
  fs::path out;
};

int run_train(const TrainArgs& a) {
  train::TrainConfig cfg = a.config ? train::TrainConfig::from_json(read_file(*a.config)) : train::TrainConfig{};
  if (a.method) cfg.method = train::parse_method(*a.method);
  if (a.features) cfg.feature_kind = dsp::parse_feature_kind(*a.features);
  if (a.kernel_delta) cfg.kernel_delta = *a.kernel_delta;
  if (a.steps) cfg.steps = *a.steps;
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();

  const auto analysis = dsp::AnalysisConfig::from_json(read_file(a.featdir / dsp::kAnalysisFileName));
  const auto data = train::TrainingData::load(corpus::read_manifest(a.manifest), a.featdir, load_domains(a.domains),
                                              cfg.feature_kind, analysis.hash());
  train::RunOptions opts;
  opts.rundir = a.out;
  opts.analysis = analysis;
  const int every = std::max(1, cfg.steps / 20);
  opts.on_step = [every](const train::LossReport& r) {
    if (r.step % every != 0) return;
    std::string line;
    for (const auto& [k, v] : r.terms) line += fmt::format(" {}={:.4f}", k, v);
    spdlog::info("step {}:{}", r.step, line);
  };
  const auto result = train::train_model(cfg, load_arch(a.arch), data, opts);
  fmt::print("trained {} steps; classifier accuracy on training data {:.3f}\n", cfg.steps,
             train::classifier_accuracy(result.model, data));
  return 0;
}

// --- vocoder ---------------------------------------------------------------------

int run_train_vocoder(const fs::path& manifest_path, const fs::path& out, convert::NeuralVocoder::Options opts,
                      const std::optional<fs::path>& analysis_path, int max_clips) {
  const auto analysis = load_analysis(analysis_path);
  const auto manifest = corpus::read_manifest(manifest_path);
  const auto loader = corpus::disk_loader(analysis.sample_rate);
  std::vector<dsp::Waveform> clips;
  for (const auto& c : manifest.clips) {
    const auto s = manifest.split.find(c.id);
    if (s != manifest.split.end() && s->second != corpus::Split::train) continue;
    clips.push_back(loader(c));
    if (max_clips > 0 && static_cast<int>(clips.size()) >= max_clips) break;
  }
  convert::NeuralVocoder voc(analysis, opts);
  const double loss = voc.fit(clips);
  voc.save(out);
  fmt::print("vocoder fitted on {} clips, final loss {:.4f}: {}\n", clips.size(), loss, out.string());
  return 0;
}

// --- convert ---------------------------------------------------------------------

// mcc models need the source-filter path; mel models use the vocoder when
// one is given.
convert::BackendKind default_backend(const convert::ConversionRequest& req) {
  if (train::load_model(req.checkpoint).meta.feature_kind == dsp::FeatureKind::mcc) {
    return convert::BackendKind::source_filter;
  }
  return req.vocoder ? convert::BackendKind::neural : convert::BackendKind::phase_recon;
}

int run_convert(convert::ConversionRequest req, const fs::path& out) {
  const auto result = convert::convert_file(req);
  convert::write_result(out, result);
  fmt::print("{} ({:.2f} s)\n", out.string(), result.audio.duration());
  return 0;
}

// --- evaluate --------------------------------------------------------------------

struct EvaluateArgs {
  std::string grid;
  fs::path rundir;
  fs::path out;
  fs::path manifest;
  std::optional<fs::path> audio_out;
  std::optional<fs::path> vocoder;
  fs::path arch;
  std::optional<fs::path> analysis;
  std::optional<fs::path> references;
  std::optional<fs::path> records;
  std::string method = "stargan";
  std::string features = "melspec";
  int sentences = 2;
};

int run_evaluate(const EvaluateArgs& a) {
  eval::EvalInputs in;
  in.manifest = corpus::read_manifest(a.manifest);
  in.rundir = a.rundir;
  in.out_dir = a.audio_out.value_or(a.out.parent_path() / "listening");
  in.vocoder = a.vocoder;
  in.base_arch = load_arch(a.arch);
  in.analysis = load_analysis(a.analysis);
  in.sentences = a.sentences;
  if (a.references) {
    const auto j = nlohmann::json::parse(read_file(*a.references));
    for (const auto& [id, text] : j.items()) in.references[id] = text.get<std::string>();
  }
  const auto kind = eval::parse_grid(a.grid);
  if (a.records) {
    const listen::RecordStore store(*a.records);
    for (const auto& r : store.effective()) {
      if (r.experiment != eval::to_string(kind)) continue;
      if (r.rating) in.ratings.push_back(*r.rating);
      if (r.transcript) in.transcripts.push_back(*r.transcript);
    }
  }
  const auto result = kind == eval::GridKind::exp1
                          ? eval::run_experiment1(in)
                          : eval::run_experiment2(in, train::parse_method(a.method), dsp::parse_feature_kind(a.features));
  write_file_atomic(a.out, result.report.to_markdown());
  fs::path csv = a.out;
  csv.replace_extension(".csv");
  write_file_atomic(csv, result.report.to_csv());
  fmt::print("{}, {}, listening clips in {}\n", a.out.string(), csv.string(), in.out_dir.string());
  return 0;
}

// --- serve -----------------------------------------------------------------------

listen::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int run_serve(const std::vector<fs::path>& experiments, const std::string& host, int port, const fs::path& records) {
  listen::ListeningService service(records);
  for (const auto& e : experiments) service.add_experiment(e);
  listen::HttpServer server(service);
  const int bound = server.bind(host, port);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  spdlog::info("listening on {}:{}", host, bound);
  server.run();
  g_server = nullptr;
  service.store().compact();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dogvc: human-to-dog voice conversion toolkit"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  CurateArgs curate;
  auto* c = app.add_subcommand("curate", "Ingest a directory of WAV files and drop clips outside the level and SNR limits");
  c->add_option("--in", curate.in, "Input directory")->required()->check(CLI::ExistingDirectory);
  c->add_option("--domain", curate.domain, "Domain name of the clips")->required();
  c->add_option("--loud-min", curate.thresholds.loud_db_min, "Minimum RMS level (dBFS)")->capture_default_str();
  c->add_option("--loud-max", curate.thresholds.loud_db_max, "Maximum RMS level (dBFS)")->capture_default_str();
  c->add_option("--snr-min", curate.thresholds.snr_min, "Minimum estimated SNR (dB)")->capture_default_str();
  c->add_option("--out", curate.out, "Manifest (merged when it exists)")->required();
  c->add_option("--rate", curate.rate, "Project sample rate")->capture_default_str();
  c->add_option("--resampled-dir", curate.resampled_dir, "Write resampled copies here");
  c->add_option("--license", curate.license, "License tag recorded per clip");
  c->add_option("--pitch-split", curate.high_domain, "Domain for clips above the pitch threshold");
  c->add_option("--pitch-threshold", curate.pitch_threshold, "Median-F0 threshold (Hz)")->capture_default_str();

  fs::path split_manifest;
  std::optional<fs::path> split_out;
  int n_eval = 10;
  std::uint64_t split_seed = 0;
  auto* s = app.add_subcommand("split", "Assign train/eval splits");
  s->add_option("--manifest", split_manifest)->required()->check(CLI::ExistingFile);
  s->add_option("--n-eval", n_eval, "Eval clips per domain")->capture_default_str();
  s->add_option("--seed", split_seed)->capture_default_str();
  s->add_option("--out", split_out, "Output manifest (default: in place)");

  fs::path ex_manifest, ex_out;
  std::string ex_kind;
  std::optional<fs::path> ex_analysis;
  auto* e = app.add_subcommand("extract", "Extract features and F0 tracks for every manifest clip");
  e->add_option("--manifest", ex_manifest)->required()->check(CLI::ExistingFile);
  e->add_option("--kind", ex_kind, "melspec or mcc")->required();
  e->add_option("--out", ex_out, "Feature directory")->required();
  e->add_option("--analysis", ex_analysis, "Analysis configuration JSON");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a conversion model");
  t->add_option("--method", tr.method, "acvae or stargan");
  t->add_option("--features", tr.features, "melspec or mcc");
  t->add_option("--kernel-delta", tr.kernel_delta, "Kernel-size offset in [-2, 2]");
  t->add_option("--config", tr.config, "Training configuration JSON");
  t->add_option("--steps", tr.steps);
  t->add_option("--seed", tr.seed);
  t->add_option("--manifest", tr.manifest)->required()->check(CLI::ExistingFile);
  t->add_option("--featdir", tr.featdir, "Directory written by extract")->required()->check(CLI::ExistingDirectory);
  t->add_option("--arch", tr.arch, "Architecture file")->default_val(fs::path(DOGVC_DEFAULT_ARCH));
  t->add_option("--domains", tr.domains, "Domain set JSON (default: the six standard slots)");
  t->add_option("--out", tr.out, "Run directory")->required();

  fs::path voc_manifest, voc_out;
  convert::NeuralVocoder::Options voc_opts;
  std::optional<fs::path> voc_analysis;
  int voc_max = 0;
  auto* v = app.add_subcommand("train-vocoder", "Fit the mel-to-waveform vocoder");
  v->add_option("--manifest", voc_manifest)->required()->check(CLI::ExistingFile);
  v->add_option("--out", voc_out)->required();
  v->add_option("--steps", voc_opts.steps)->capture_default_str();
  v->add_option("--hidden", voc_opts.hidden)->capture_default_str();
  v->add_option("--seed", voc_opts.seed)->capture_default_str();
  v->add_option("--max-clips", voc_max, "0 uses every training clip")->capture_default_str();
  v->add_option("--analysis", voc_analysis);

  convert::ConversionRequest req;
  fs::path conv_out;
  std::string backend;
  auto* cv = app.add_subcommand("convert", "Convert one utterance");
  cv->add_option("--ckpt", req.checkpoint)->required()->check(CLI::ExistingFile);
  cv->add_option("--in", req.input)->required()->check(CLI::ExistingFile);
  cv->add_option("--src", req.source)->required();
  cv->add_option("--tgt", req.target)->required();
  cv->add_option("--backend", backend, "source_filter, neural or phase_recon (default: by feature kind)");
  cv->add_option("--vocoder", req.vocoder, "Weights for the neural backend");
  cv->add_option("--seed", req.seed)->capture_default_str();
  cv->add_option("--out", conv_out)->required();

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Run an experiment grid and write the report");
  ev_cmd->add_option("--grid", ev.grid, "exp1 or exp2")->required();
  ev_cmd->add_option("--rundir", ev.rundir, "One run directory per grid condition")->required();
  ev_cmd->add_option("--out", ev.out, "Markdown report (CSV written next to it)")->required();
  ev_cmd->add_option("--manifest", ev.manifest)->required()->check(CLI::ExistingFile);
  ev_cmd->add_option("--audio-out", ev.audio_out, "Converted clips and experiment.json");
  ev_cmd->add_option("--vocoder", ev.vocoder, "Neural vocoder for mel conditions");
  ev_cmd->add_option("--arch", ev.arch)->default_val(fs::path(DOGVC_DEFAULT_ARCH));
  ev_cmd->add_option("--analysis", ev.analysis);
  ev_cmd->add_option("--references", ev.references, "JSON object: clip id -> reference text");
  ev_cmd->add_option("--records", ev.records, "Listening-test records directory");
  ev_cmd->add_option("--method", ev.method, "exp2 method")->capture_default_str();
  ev_cmd->add_option("--features", ev.features, "exp2 features")->capture_default_str();
  ev_cmd->add_option("--sentences", ev.sentences)->capture_default_str();

  std::vector<fs::path> serve_experiments;
  std::string host = "127.0.0.1";
  int port = 8080;
  fs::path records;
  auto* sv = app.add_subcommand("serve", "Serve a listening test");
  sv->add_option("--experiment", serve_experiments, "experiment.json written by evaluate")
      ->required()
      ->check(CLI::ExistingFile);
  sv->add_option("--host", host)->capture_default_str();
  sv->add_option("--port", port)->capture_default_str();
  sv->add_option("--records", records)->required();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*c) return run_curate(curate);
    if (*s) return run_split(split_manifest, split_out, n_eval, split_seed);
    if (*e) return run_extract(ex_manifest, ex_kind, ex_out, ex_analysis);
    if (*t) return run_train(tr);
    if (*v) return run_train_vocoder(voc_manifest, voc_out, voc_opts, voc_analysis, voc_max);
    if (*cv) {
      req.backend = backend.empty() ? default_backend(req) : convert::parse_backend(backend);
      return run_convert(req, conv_out);
    }
    if (*ev_cmd) return run_evaluate(ev);
    if (*sv) return run_serve(serve_experiments, host, port, records);
  } catch (const std::exception& ex) {
    spdlog::error("{}", ex.what());
    return 1;
  }
  return 0;
}
