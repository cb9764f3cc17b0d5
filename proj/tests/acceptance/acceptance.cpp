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

// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dogvc/convert.hpp"
#include "dogvc/dsp/mel.hpp"
#include "dogvc/eval.hpp"
#include "dogvc/nets/networks.hpp"
#include "dogvc/nets/ops.hpp"
#include "dogvc/train.hpp"
#include "gradcheck_cases.hpp"
#include "oracles.hpp"
#include "toy.hpp"

using namespace dogvc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Collects failed expectations for the detail line.
struct Check {
  bool ok = true;
  std::vector<std::string> failures;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (failures.size() < 5) failures.push_back(what);
    }
  }
  std::string why() const {
    std::string s;
    for (const auto& f : failures) s += (s.empty() ? "" : "; ") + f;
    return s;
  }
};

Outcome cer_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int mismatches = 0, total = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = fixtures::random_string(rng, 12), b = fixtures::random_string(rng, 12);
    const auto s = eval::edit_stats(a, b);
    const int want = fixtures::brute_distance(a, b);
    mismatches += s.distance() != want;
    total += want;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 30.0,
          fmt::format("1000 pairs, {} mismatches, total distance {}, {:.2f} s (limit 30 s)", mismatches, total, secs)};
}

Outcome cer_spot_values() {
  const double same = eval::cer("abc", "abc"), sub = eval::cer("abc", "abd"), empty = eval::cer("abc", "");
  return {same == 0.0 && sub == 1.0 / 3.0 && empty == 1.0,
          fmt::format("identical {}, abc/abd {:.17g}, empty hypothesis {}", same, sub, empty)};
}

Outcome gradient_checks() {
  const auto t0 = Clock::now();
  auto cases = fixtures::primitive_gradient_cases(1);
  const auto losses = fixtures::loss_gradient_cases(11);
  cases.insert(cases.end(), losses.begin(), losses.end());
  double worst = 0.0;
  std::string worst_name;
  Check c;
  for (const auto& g : cases) {
    if (g.max_rel_error > worst) worst = g.max_rel_error, worst_name = g.name;
    c.expect(g.max_rel_error < 1e-4, fmt::format("{} rel error {:.3g}", g.name, g.max_rel_error));
    c.expect(g.min_grad_norm > 0.0, g.name + " has an all-zero gradient");
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 120.0, fmt::format("took {:.1f} s", secs));
  return {c.ok, fmt::format("{} cases ({} loss), worst rel error {:.3g} ({}), {:.1f} s (limit 120 s){}", cases.size(),
                            losses.size(), worst, worst_name, secs, c.ok ? "" : " | " + c.why())};
}

Outcome kl_closed_form() {
  const std::vector<double> zero{0.0}, one{1.0};
  const double prior = nets::kl_diag_gaussian(zero, one);
  const double shifted = nets::kl_diag_gaussian(one, one);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 2.0);
  std::uniform_real_distribution<double> lv(-6.0, 6.0);
  double lowest = INFINITY;
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> m(4), v(4);
    for (int k = 0; k < 4; ++k) m[k] = g(rng), v[k] = std::exp(lv(rng));
    lowest = std::min(lowest, nets::kl_diag_gaussian(m, v));
  }
  return {std::abs(prior) <= 1e-9 && std::abs(shifted - 0.5) <= 1e-9 && lowest >= 0.0,
          fmt::format("KL(0,1) = {:.3g}, KL(1,1) = {:.17g}, min over 1e4 random = {:.3g}", prior, shifted, lowest)};
}

Outcome mel_oracle() {
  dsp::MelConfig cfg;
  const auto w = fixtures::random_audio(static_cast<std::size_t>(cfg.stft.frame_len + 3 * cfg.stft.hop), 8);
  const Matrix got = dsp::mel_spectrogram(w, cfg).frames.array().exp().matrix();
  const Matrix want = fixtures::oracle_mel_power(w, cfg);
  const bool shapes = got.rows() == want.rows() && got.cols() == want.cols();
  const double rel = shapes ? ((got - want).cwiseAbs().array() / want.array()).maxCoeff() : INFINITY;

  const auto tone = dsp::mel_spectrogram(fixtures::sine(1000.0, 0.5), cfg).frames;
  Eigen::Index peak = 0;
  tone.colwise().mean().maxCoeff(&peak);
  const auto centres = dsp::mel_center_frequencies(cfg.n_mels, cfg.fmin, cfg.fmax);
  int nearest = 0;
  for (int m = 1; m < cfg.n_mels; ++m) {
    if (std::abs(centres[m] - 1000.0) < std::abs(centres[nearest] - 1000.0)) nearest = m;
  }
  return {rel <= 1e-6 && peak == nearest,
          fmt::format("max relative error {:.3g} (limit 1e-6) over {} frames; 1 kHz peak bin {} vs nearest centre {}",
                      rel, got.rows(), peak, nearest)};
}

int composed_length(const std::vector<nets::LayerSpec>& specs, int t) {
  for (const auto& l : specs) {
    if (t < l.kernel) return 0;
    t = (t - l.kernel) / l.stride + 1;
  }
  return t;
}

nets::Tensor random_input(int n, int f, int t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  nets::Tensor x(n, f, t);
  for (auto& v : x.data()) v = g(rng);
  return x;
}

Outcome shape_suite() {
  using nets::Role;
  const auto base = nets::load_architecture(fixtures::config_path("arch/default.arch"));
  Check c;
  std::vector<int> rf_d, rf_c;
  const int f = 16;
  for (int delta = -2; delta <= 2; ++delta) {
    const auto cfg = nets::build_with_kernel_delta(base, delta);
    nets::StarGanNets sg(cfg, f, 3);
    const int rf = nets::receptive_field(cfg, Role::discriminator);
    for (int t : {rf, rf + 1, rf + 7, 2 * rf + 3}) {
      const auto d = sg.discriminator.forward(nets::constant(random_input(2, f, t, 1)), nets::onehot_batch({0, 3}, 6),
                                              nets::ForwardMode::infer());
      const int want = composed_length(cfg.specs(Role::discriminator), t);
      c.expect(d->value.n() == 2 && d->value.c() == 1 && d->value.t() == want,
               fmt::format("delta {} T {}: discriminator length {} vs {}", delta, t, d->value.t(), want));
      c.expect(composed_length(cfg.specs(Role::classifier), t) ==
                   nets::valid_output_length(cfg.specs(Role::classifier), t),
               fmt::format("delta {} T {}: classifier length", delta, t));
    }
    const auto logits = sg.classifier.logits(nets::constant(random_input(2, f, 100, 2)), nets::ForwardMode::infer());
    c.expect(logits->value.c() == cfg.num_domains && logits->value.t() == 1,
             fmt::format("delta {}: classifier logits shape", delta));
    rf_d.push_back(nets::receptive_field(cfg, Role::discriminator));
    rf_c.push_back(nets::receptive_field(cfg, Role::classifier));

    // Generator length with and without the delta applied to its kernels.
    auto with_gen = base;
    with_gen.delta_on_generator = true;
    nets::StarGanNets gsg(nets::build_with_kernel_delta(with_gen, delta), f, 4);
    nets::StarGanNets plain(cfg, f, 5);
    for (int t : {1, 7, 32, 33, 50, 128}) {
      for (const auto* net : {&gsg, &plain}) {
        const auto y = net->generator.forward(nets::constant(random_input(1, f, t, t)), nets::onehot_batch({2}, 6),
                                              nets::ForwardMode::infer());
        c.expect(y->value.t() == t && y->value.c() == f,
                 fmt::format("delta {}: generator maps T {} to {}", delta, t, y->value.t()));
      }
    }
  }
  for (std::size_t i = 1; i < rf_d.size(); ++i) {
    c.expect(rf_d[i] > rf_d[i - 1], "discriminator receptive field not strictly increasing");
    c.expect(rf_c[i] > rf_c[i - 1], "classifier receptive field not strictly increasing");
  }
  return {c.ok, fmt::format("deltas -2..+2, discriminator RF {}, classifier RF {}{}", fmt::join(rf_d, "/"),
                            fmt::join(rf_c, "/"), c.ok ? "" : " | " + c.why())};
}

Outcome toy_convergence() {
  const auto t0 = Clock::now();
  fixtures::TempDir dir("accept-train");
  const auto corpus = fixtures::make_toy_corpus(dir.path(), 30, 1.0);
  double longest = 0.0;
  for (const auto& clip : corpus.manifest.clips) longest = std::max(longest, clip.duration);
  const auto data = train::TrainingData::load(corpus.manifest, corpus.featdir, corpus.domains,
                                              dsp::FeatureKind::melspec, corpus.analysis.hash());
  const auto arch = fixtures::toy_arch();
  Check c;
  c.expect(corpus.manifest.clips.size() <= 60 && longest <= 2.0, "corpus too large");

  const auto acvae_cfg = fixtures::toy_convergence_config(train::Method::acvae, dsp::FeatureKind::melspec);
  const auto acvae = train::train_model(acvae_cfg, arch, data);
  auto window_mean = [&](std::size_t from) {
    double s = 0.0;
    for (std::size_t i = from; i < from + 10; ++i) s += acvae.log[i].at("recon");
    return s / 10.0;
  };
  const double first = window_mean(0), last = window_mean(acvae.log.size() - 10);
  const double drop = (first - last) / std::abs(first);
  c.expect(acvae_cfg.steps <= 500, "more than 500 steps");
  c.expect(drop >= 0.5, fmt::format("NLL drop {:.3f} < 0.5", drop));
  double min_kl = INFINITY;
  for (const auto& r : acvae.log) {
    min_kl = std::min(min_kl, r.at("kl"));
    for (const auto& [term, v] : r.terms) c.expect(std::isfinite(v), term + " not finite");
  }
  c.expect(min_kl >= 0.0, "negative KL");

  const auto gan_cfg = fixtures::toy_convergence_config(train::Method::stargan, dsp::FeatureKind::melspec);
  const auto gan = train::train_model(gan_cfg, arch, data);
  const double acc = train::classifier_accuracy(gan.model, data);
  c.expect(acc >= 0.9, fmt::format("classifier accuracy {:.3f} < 0.9", acc));
  for (const auto& r : gan.log) {
    for (const auto& [term, v] : r.terms) c.expect(std::isfinite(v), term + " not finite");
  }
  const double secs = seconds_since(t0);
  c.expect(secs <= 600.0, fmt::format("took {:.0f} s", secs));

  // Same seeds again: the logs must match bit for bit.
  const bool same = train::format_log_csv(train::train_model(acvae_cfg, arch, data).log) ==
                        train::format_log_csv(acvae.log) &&
                    train::format_log_csv(train::train_model(gan_cfg, arch, data).log) == train::format_log_csv(gan.log);
  c.expect(same, "rerun with the same seed changed the loss log");

  return {c.ok, fmt::format("{} clips <= {:.1f} s; ACVAE recon NLL {:.2f} -> {:.2f} over {} steps (drop {:.1f}%, need "
                            "50%); StarGAN real-data accuracy {:.1f}% after {} steps (need 90%); {:.0f} s (limit 600 s); "
                            "rerun identical: {}{}",
                            corpus.manifest.clips.size(), longest, first, last, acvae.log.size(), 100.0 * drop,
                            100.0 * acc, gan.log.size(), secs, same ? "yes" : "no", c.ok ? "" : " | " + c.why())};
}

Outcome vocoder_round_trip() {
  const dsp::AnalysisConfig analysis;
  const auto vowel = fixtures::vowel(220.0, 1.0, {700, 1200, 2600});
  const auto a = dsp::analyze_source_filter(vowel, analysis);
  convert::SynthesisConfig cfg;
  cfg.stft = analysis.stft;
  const auto out = convert::synthesize_source_filter(a.mcc, a.f0, a.aperiodicity, cfg);
  const auto f0 = dsp::median_voiced_f0(dsp::estimate_f0(out, analysis.f0()));
  const double err = f0 ? std::abs(*f0 - 220.0) / 220.0 : INFINITY;

  const auto tone = fixtures::sine(1000.0, 0.5);
  const auto mel = dsp::extract_features(tone, dsp::FeatureKind::melspec, analysis);
  const auto back = dsp::extract_features(convert::phase_reconstruct(mel, analysis), dsp::FeatureKind::melspec, analysis);
  Eigen::Index in_bin = 0, out_bin = 0;
  mel.frames.colwise().mean().maxCoeff(&in_bin);
  back.frames.colwise().mean().maxCoeff(&out_bin);
  return {err <= 0.05 && in_bin == out_bin,
          fmt::format("source-filter median F0 {:.2f} Hz for 220 Hz ({:.2f}%, limit 5%); phase reconstruction argmax "
                      "mel bin {} -> {}",
                      f0.value_or(0.0), 100.0 * err, in_bin, out_bin)};
}

Outcome cycle_identity_zero() {
  auto cfg = fixtures::toy_arch();
  cfg.num_domains = 2;
  nets::StarGanNets sg(cfg, 6, 1);
  train::Batch b{random_input(3, 6, 24, 1), {0, 1, 0}};
  const train::GeneratorFn identity = [](const nets::Var& x, const nets::Tensor&) { return x; };
  const auto g = train::stargan_generator_loss(b, {1, 0, 1}, sg, train::LossWeights{},
                                               nets::ForwardMode::frozen_train(), identity);
  const double cyc = g.report.at("cycle"), id = g.report.at("identity");
  return {cyc == 0.0 && id == 0.0, fmt::format("cycle {} identity {}", cyc, id)};
}

Outcome experiment_grids() {
  fixtures::TempDir dir("accept-grid");
  const auto corpus = fixtures::make_toy_corpus(dir.path(), 4, 0.5);
  auto train_cells = [&](const eval::ExperimentGrid& grid, const fs::path& root) {
    for (const auto& cell : grid.cells) {
      const auto data = train::TrainingData::load(corpus.manifest, corpus.featdir, corpus.domains, cell.features,
                                                  corpus.analysis.hash());
      auto cfg = fixtures::toy_train_config(cell.method, cell.features, 3);
      cfg.kernel_delta = cell.kernel_delta;
      train::RunOptions opts;
      opts.rundir = root / cell.condition;
      opts.analysis = corpus.analysis;
      train::train_model(cfg, fixtures::toy_arch(), data, opts);
    }
  };
  train_cells(eval::experiment1_grid(), dir.path() / "runs1");
  train_cells(eval::experiment2_grid(), dir.path() / "runs2");
  auto inputs = [&](const std::string& runs, const std::string& out) {
    eval::EvalInputs in;
    in.manifest = corpus.manifest;
    in.rundir = dir.path() / runs;
    in.out_dir = dir.path() / out;
    in.base_arch = fixtures::toy_arch();
    in.analysis = corpus.analysis;
    return in;
  };
  auto structure = [](const eval::Report& r) {
    std::vector<std::string> s;
    for (const auto& row : r.rows) s.push_back((row.control ? "control:" : "") + row.label + (row.missing ? "?" : ""));
    return s;
  };
  Check c;
  const auto e1 = eval::run_experiment1(inputs("runs1", "e1a"));
  const auto e2 = eval::run_experiment2(inputs("runs2", "e2a"));
  const std::vector<std::string> want1 = {"StarGAN-VC (MCC)",     "StarGAN-VC (melspec)",       "ACVAE-VC (MCC)",
                                          "ACVAE-VC (melspec)",   "control:FKN (original)",     "control:Adult Dog (original)",
                                          "control:White Noise"};
  const std::vector<std::string> want2 = {"k_d +2", "k_d +1", "k_d", "k_d -1", "k_d -2", "control:FKN (original)",
                                          "control:Adult Dog (original)", "control:White Noise"};
  c.expect(structure(e1.report) == want1, "experiment 1 rows: " + fmt::format("{}", fmt::join(structure(e1.report), ", ")));
  c.expect(structure(e2.report) == want2, "experiment 2 rows: " + fmt::format("{}", fmt::join(structure(e2.report), ", ")));
  for (const auto& row : e2.report.rows) {
    if (!row.control) c.expect(row.receptive_field.has_value(), row.label + " lacks a receptive field");
  }

  const auto e1b = eval::run_experiment1(inputs("runs1", "e1b"));
  const auto e2b = eval::run_experiment2(inputs("runs2", "e2b"));
  bool same = e1.report.to_markdown() == e1b.report.to_markdown() && e1.report.to_csv() == e1b.report.to_csv() &&
              e2.report.to_markdown() == e2b.report.to_markdown() && e2.report.to_csv() == e2b.report.to_csv() &&
              e1.experiment.to_json() == e1b.experiment.to_json() && e2.experiment.to_json() == e2b.experiment.to_json();
  for (const auto& [a, b, exp] : {std::tuple{"e1a", "e1b", &e1.experiment}, std::tuple{"e2a", "e2b", &e2.experiment}}) {
    for (const auto& clip : exp->clips) same = same && read_file(dir.path() / a / clip.path) == read_file(dir.path() / b / clip.path);
  }
  c.expect(same, "second run differs");
  return {c.ok, fmt::format("experiment 1: {} method rows + 3 controls; experiment 2: {} kernel rows + 3 controls; "
                            "repeat run identical: {}{}",
                            e1.report.rows.size() - 3, e2.report.rows.size() - 3, same ? "yes" : "no",
                            c.ok ? "" : " | " + c.why())};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"cer-oracle-equivalence", cer_oracle},
      {"cer-spot-values", cer_spot_values},
      {"gradient-checks", gradient_checks},
      {"kl-closed-form", kl_closed_form},
      {"mel-filterbank-oracle", mel_oracle},
      {"shape-receptive-field-suite", shape_suite},
      {"toy-convergence", toy_convergence},
      {"vocoder-round-trip", vocoder_round_trip},
      {"cycle-identity-zero", cycle_identity_zero},
      {"experiment-grids", experiment_grids},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
