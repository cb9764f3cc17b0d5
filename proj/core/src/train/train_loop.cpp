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

#include <cmath>
#include <cstdio>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "dogvc/train.hpp"

namespace dogvc::train {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(Method m) { return m == Method::acvae ? "acvae" : "stargan"; }

Method parse_method(const std::string& s) {
  if (s == "acvae") return Method::acvae;
  if (s == "stargan") return Method::stargan;
  throw Error("unknown training method '" + s + "' (expected acvae or stargan)");
}

void TrainConfig::validate() const {
  for (double w : {weights.kl, weights.aux, weights.cls, weights.cyc, weights.id}) {
    if (!(w >= 0) || !std::isfinite(w)) throw Error("loss weights must be finite and >= 0");
  }
  if (!(lr_g > 0) || !(lr_d > 0)) throw Error("learning rates must be positive");
  if (batch < 1) throw Error("batch must be >= 1");
  if (crop_frames < 1) throw Error("crop_frames must be >= 1");
  if (steps < 0) throw Error("steps must be >= 0");
  if (checkpoint_every < 0) throw Error("checkpoint_every must be >= 0");
  if (feature_kind == dsp::FeatureKind::f0) throw Error("networks train on melspec or mcc features");
  if (kernel_delta < -2 || kernel_delta > 2) throw Error(fmt::format("kernel_delta {} outside [-2, 2]", kernel_delta));
}

std::string TrainConfig::to_json() const {
  ordered_json j;
  j["method"] = to_string(method);
  j["features"] = dsp::to_string(feature_kind);
  j["lambda_kl"] = weights.kl;
  j["lambda_aux"] = weights.aux;
  j["lambda_cls"] = weights.cls;
  j["lambda_cyc"] = weights.cyc;
  j["lambda_id"] = weights.id;
  j["lr_g"] = lr_g;
  j["lr_d"] = lr_d;
  j["clip_norm"] = clip_norm;
  j["batch"] = batch;
  j["crop_frames"] = crop_frames;
  j["steps"] = steps;
  j["checkpoint_every"] = checkpoint_every;
  j["kernel_delta"] = kernel_delta;
  j["seed"] = seed;
  return j.dump(2);
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  TrainConfig c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("training config: ") + e.what());
  }
  if (!j.is_object()) throw Error("training config must be a JSON object");
  static const std::set<std::string> known = {"method", "features", "lambda_kl", "lambda_aux", "lambda_cls",
                                              "lambda_cyc", "lambda_id", "lr_g", "lr_d", "clip_norm", "batch",
                                              "crop_frames", "steps", "checkpoint_every", "kernel_delta", "seed"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw Error("training config: unknown key '" + k + "'");
  }
  try {
    if (j.contains("method")) c.method = parse_method(j["method"].get<std::string>());
    if (j.contains("features")) c.feature_kind = dsp::parse_feature_kind(j["features"].get<std::string>());
    c.weights.kl = j.value("lambda_kl", c.weights.kl);
    c.weights.aux = j.value("lambda_aux", c.weights.aux);
    c.weights.cls = j.value("lambda_cls", c.weights.cls);
    c.weights.cyc = j.value("lambda_cyc", c.weights.cyc);
    c.weights.id = j.value("lambda_id", c.weights.id);
    c.lr_g = j.value("lr_g", c.lr_g);
    c.lr_d = j.value("lr_d", c.lr_d);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
    c.batch = j.value("batch", c.batch);
    c.crop_frames = j.value("crop_frames", c.crop_frames);
    c.steps = j.value("steps", c.steps);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    c.kernel_delta = j.value("kernel_delta", c.kernel_delta);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw Error(std::string("training config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

ordered_json norm_to_json(const dsp::NormStats& s) {
  ordered_json j;
  j["domain"] = s.domain;
  j["mean"] = std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size());
  j["std"] = std::vector<double>(s.std.data(), s.std.data() + s.std.size());
  return j;
}

dsp::NormStats norm_from_json(const json& j) {
  dsp::NormStats s;
  s.domain = j.at("domain").get<std::string>();
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto sd = j.at("std").get<std::vector<double>>();
  s.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  s.std = Eigen::Map<const Vector>(sd.data(), static_cast<Eigen::Index>(sd.size()));
  return s;
}

}  // namespace

std::string ModelMetadata::to_json() const {
  ordered_json j;
  j["method"] = to_string(method);
  j["features"] = dsp::to_string(feature_kind);
  j["feature_dim"] = feature_dim;
  j["domains"] = json::parse(domains.to_json());
  j["arch"] = arch_text;
  j["kernel_delta"] = kernel_delta;
  j["analysis"] = json::parse(analysis.to_json());
  j["norm"] = ordered_json::array();
  for (const auto& s : norm) j["norm"].push_back(norm_to_json(s));
  j["log_f0"] = ordered_json::array();
  for (const auto& s : log_f0) j["log_f0"].push_back({{"mean", s.mean}, {"std", s.std}, {"frames", s.frames}});
  j["train"] = train_config.empty() ? json::object() : json::parse(train_config);
  return j.dump();
}

ModelMetadata ModelMetadata::from_json(const std::string& text) {
  ModelMetadata m;
  try {
    const json j = json::parse(text);
    m.method = parse_method(j.at("method").get<std::string>());
    m.feature_kind = dsp::parse_feature_kind(j.at("features").get<std::string>());
    m.feature_dim = j.at("feature_dim").get<int>();
    m.domains = corpus::DomainSet::from_json(j.at("domains").dump());
    m.arch_text = j.at("arch").get<std::string>();
    m.kernel_delta = j.at("kernel_delta").get<int>();
    m.analysis = dsp::AnalysisConfig::from_json(j.at("analysis").dump());
    for (const auto& s : j.at("norm")) m.norm.push_back(norm_from_json(s));
    for (const auto& s : j.at("log_f0")) {
      m.log_f0.push_back({s.at("mean").get<double>(), s.at("std").get<double>(), s.at("frames").get<std::size_t>()});
    }
    m.train_config = j.at("train").dump();
  } catch (const json::exception& e) {
    throw Error(std::string("checkpoint metadata: ") + e.what());
  }
  return m;
}

const nets::ModelBundle& TrainedModel::bundle() const {
  if (stargan) return *stargan;
  if (acvae) return *acvae;
  throw Error("empty model");
}

TrainedModel make_model(Method method, const nets::NetworkConfig& cfg, int feature_dim, std::uint64_t seed) {
  TrainedModel m;
  m.method = method;
  if (method == Method::stargan) {
    m.stargan = std::make_unique<nets::StarGanNets>(cfg, feature_dim, seed);
  } else {
    m.acvae = std::make_unique<nets::AcvaeNets>(cfg, feature_dim, seed);
  }
  return m;
}

std::string format_log_csv(const std::vector<LossReport>& log) {
  std::string out = "step,term,value\n";
  char buf[64];
  for (const auto& r : log) {
    for (const auto& [k, v] : r.terms) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += fmt::format("{},{},{}\n", r.step, k, buf);
    }
  }
  return out;
}

namespace {

void require_crop(const nets::NetworkConfig& arch, nets::Role role, int crop) {
  const int r = nets::receptive_field(arch, role);
  if (!arch.specs(role).empty() && crop < r) {
    throw Error(fmt::format("crop_frames {} is shorter than the {} receptive field of {} frames", crop,
                            nets::to_string(role), r));
  }
}

nets::Tensor standard_normal(int n, int c, int t, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  nets::Tensor out(n, c, t);
  for (auto& v : out.data()) v = dist(rng);
  return out;
}

std::vector<nets::Parameter> concat(std::vector<nets::Parameter> a, const std::vector<nets::Parameter>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TrainResult train_model(const TrainConfig& cfg, const nets::NetworkConfig& base_arch, const TrainingData& data,
                        const RunOptions& options) {
  cfg.validate();
  nets::NetworkConfig arch = base_arch;
  arch.num_domains = data.domains().size();
  arch = nets::build_with_kernel_delta(arch, cfg.kernel_delta);
  arch.validate();
  if (cfg.method == Method::stargan) {
    if (data.active_slots().size() < 2) throw Error("stargan training needs clips from at least two domains");
    require_crop(arch, nets::Role::discriminator, cfg.crop_frames);
    require_crop(arch, nets::Role::classifier, cfg.crop_frames);
  } else {
    require_crop(arch, nets::Role::aux_classifier, cfg.crop_frames);
  }

  TrainResult result;
  result.model = make_model(cfg.method, arch, data.feature_dim(), cfg.seed ^ 0x6d6f64656cULL);

  ModelMetadata meta;
  meta.method = cfg.method;
  meta.feature_kind = cfg.feature_kind;
  meta.feature_dim = data.feature_dim();
  meta.domains = data.domains();
  meta.arch_text = arch.to_text();
  meta.kernel_delta = arch.kernel_delta;
  meta.analysis = options.analysis;
  meta.norm = data.all_stats();
  meta.log_f0 = data.log_f0_stats();
  meta.train_config = cfg.to_json();
  result.metadata = meta.to_json();

  std::filesystem::path ckpt_dir;
  if (options.rundir) {
    ckpt_dir = *options.rundir / "checkpoints";
    std::filesystem::create_directories(ckpt_dir);
    ordered_json snap;
    snap["train"] = json::parse(cfg.to_json());
    snap["arch"] = meta.arch_text;
    snap["domains"] = json::parse(data.domains().to_json());
    snap["analysis"] = json::parse(options.analysis.to_json());
    write_file_atomic(*options.rundir / "config.json", snap.dump(2) + "\n");
  }
  auto write_outputs = [&](std::int64_t step) {
    if (!options.rundir) return;
    const auto& bundle = result.model.bundle();
    const std::string bytes = nets::encode_checkpoint(nets::snapshot(bundle, static_cast<std::uint64_t>(step),
                                                                     result.metadata));
    write_file_atomic(ckpt_dir / fmt::format("step_{:07d}.ckpt", step), bytes);
    write_file_atomic(ckpt_dir / "latest.ckpt", bytes);
    write_file_atomic(*options.rundir / "log.csv", format_log_csv(result.log));
  };

  std::mt19937_64 rng(cfg.seed);
  const auto mode = nets::ForwardMode::train();

  if (cfg.method == Method::stargan) {
    auto& nets = *result.model.stargan;
    Adam opt_g(nets.generator_parameters(), cfg.lr_g);
    Adam opt_d(nets.critic_parameters(), cfg.lr_d);
    const auto all = nets.parameters();
    for (int step = 1; step <= cfg.steps; ++step) {
      const Batch batch = data.sample(cfg.batch, cfg.crop_frames, rng);
      const auto targets = data.other_labels(batch.labels, rng);

      nets::zero_grad(all);
      auto d = stargan_critic_loss(batch, targets, nets, cfg.weights, mode);
      d.report.require_finite();
      nets::backward(d.total);
      opt_d.step(cfg.clip_norm);

      nets::zero_grad(all);
      auto g = stargan_generator_loss(batch, targets, nets, cfg.weights, mode);
      g.report.require_finite();
      nets::backward(g.total);
      opt_g.step(cfg.clip_norm);

      LossReport r;
      r.step = step;
      for (const auto& [k, v] : d.report.terms) r.terms[k == "total" ? "total_d" : k] = v;
      for (const auto& [k, v] : g.report.terms) r.terms[k == "total" ? "total_g" : k] = v;
      r.terms["total"] = r.terms["total_d"] + r.terms["total_g"];
      result.log.push_back(r);
      if (options.on_step) options.on_step(r);
      if (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0) write_outputs(step);
    }
  } else {
    auto& nets = *result.model.acvae;
    Adam opt_vae(nets.vae_parameters(), cfg.lr_g);
    Adam opt_aux(nets.aux_parameters(), cfg.lr_d);
    const auto all = concat(nets.vae_parameters(), nets.aux_parameters());
    const int latent_len = (cfg.crop_frames + nets.encoder.stride() - 1) / nets.encoder.stride();
    for (int step = 1; step <= cfg.steps; ++step) {
      const Batch batch = data.sample(cfg.batch, cfg.crop_frames, rng);
      const auto swapped = data.other_labels(batch.labels, rng);
      const auto eps = standard_normal(cfg.batch, arch.latent_dim, latent_len, rng);

      nets::zero_grad(all);
      auto l = acvae_loss(batch, nets, cfg.weights, eps, swapped, mode);
      l.report.step = step;
      l.report.require_finite();
      nets::backward(l.total);
      opt_vae.step(cfg.clip_norm);
      opt_aux.step(cfg.clip_norm);

      result.log.push_back(l.report);
      if (options.on_step) options.on_step(l.report);
      if (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0) write_outputs(step);
    }
  }
  if (options.rundir && (cfg.checkpoint_every == 0 || cfg.steps % cfg.checkpoint_every != 0)) write_outputs(cfg.steps);
  return result;
}

double classifier_accuracy(const TrainedModel& model, const TrainingData& data) {
  const nets::DomainClassifier& cls =
      model.stargan ? model.stargan->classifier : model.acvae->aux_classifier;
  int correct = 0, total = 0;
  for (int slot : data.active_slots()) {
    for (Matrix x : data.normalized_items(slot)) {
      nets::Tensor in = nets::Tensor::from_matrix(x);
      const int need = cls.receptive_field();
      if (in.t() < need) {
        nets::Tensor tiled(1, in.c(), need);
        for (int c = 0; c < in.c(); ++c) {
          for (int t = 0; t < need; ++t) tiled(0, c, t) = in(0, c, t % in.t());
        }
        in = std::move(tiled);
      }
      const nets::Tensor p = cls.probabilities(in);
      int best = 0;
      for (int d = 1; d < p.c(); ++d) {
        if (p(0, d, 0) > p(0, best, 0)) best = d;
      }
      correct += best == slot;
      ++total;
    }
  }
  return total ? static_cast<double>(correct) / total : 0.0;
}

LoadedModel load_model(const std::filesystem::path& checkpoint) {
  const auto ckpt = nets::read_checkpoint(checkpoint);
  LoadedModel out;
  out.meta = ModelMetadata::from_json(ckpt.metadata);
  nets::NetworkConfig arch = nets::parse_architecture(out.meta.arch_text);
  arch.kernel_delta = out.meta.kernel_delta;
  arch.num_domains = out.meta.domains.size();
  if (ckpt.num_domains != arch.num_domains) throw Error("checkpoint domain count disagrees with its metadata");
  out.model = make_model(out.meta.method, arch, out.meta.feature_dim, 0);
  nets::restore(ckpt, out.model.bundle());
  out.step = ckpt.step;
  return out;
}

}  // namespace dogvc::train
