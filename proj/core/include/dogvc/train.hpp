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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dogvc/corpus.hpp"
#include "dogvc/dsp/analysis.hpp"
#include "dogvc/dsp/features.hpp"
#include "dogvc/nets/checkpoint.hpp"
#include "dogvc/nets/networks.hpp"

namespace dogvc::train {

enum class Method { acvae, stargan };
std::string to_string(Method m);
Method parse_method(const std::string& s);

struct LossWeights {
  double kl = 1.0;
  double aux = 1.0;
  double cls = 1.0;
  double cyc = 10.0;
  double id = 5.0;
};

struct TrainConfig {
  Method method = Method::stargan;
  dsp::FeatureKind feature_kind = dsp::FeatureKind::melspec;
  LossWeights weights;
  double lr_g = 1e-4;  // generator / encoder / decoder
  double lr_d = 5e-5;  // discriminator / classifiers
  double clip_norm = 10.0;
  int batch = 8;
  int crop_frames = 128;
  int steps = 10000;
  int checkpoint_every = 1000;
  int kernel_delta = 0;
  std::uint64_t seed = 0;

  void validate() const;
  std::string to_json() const;
  /// Keys missing from `text` keep their defaults.
  static TrainConfig from_json(const std::string& text);
};

/// Named loss terms of one step. `total` is the weighted sum actually
/// differentiated.
struct LossReport {
  std::int64_t step = 0;
  std::map<std::string, double> terms;

  double at(const std::string& name) const;
  /// Throws with every term listed when any value is NaN or infinite.
  void require_finite() const;
};

struct Batch {
  nets::Tensor x;           // N x F x T, normalized
  std::vector<int> labels;  // class slot per item
};

/// Loss graph of one step: the differentiable total plus its report.
struct LossGraph {
  nets::Var total;
  LossReport report;
};

/// Reconstruction NLL + λ_kl KL + λ_aux (aux + cls_real). `eps` matches the
/// latent shape (N x Z x ceil(T / stride)); `swapped` holds a second label per
/// item for the label-swapped decode.
LossGraph acvae_loss(const Batch& batch, const nets::AcvaeNets& nets, const LossWeights& w, const nets::Tensor& eps,
                     const std::vector<int>& swapped, nets::ForwardMode mode);

/// Generator used by the StarGAN criteria; defaults to the network.
using GeneratorFn = std::function<nets::Var(const nets::Var& x, const nets::Tensor& onehot)>;

/// Discriminator/classifier step: BCE(real) + BCE(fake, detached) + λ_cls cls_real.
LossGraph stargan_critic_loss(const Batch& batch, const std::vector<int>& targets, const nets::StarGanNets& nets,
                              const LossWeights& w, nets::ForwardMode mode, const GeneratorFn& gen = {});
/// Generator step: adv_g + λ_cls cls_fake + λ_cyc cycle + λ_id identity.
/// The critics run with frozen statistics.
LossGraph stargan_generator_loss(const Batch& batch, const std::vector<int>& targets, const nets::StarGanNets& nets,
                                 const LossWeights& w, nets::ForwardMode mode, const GeneratorFn& gen = {});

/// Adam with global-norm gradient clipping.
class Adam {
 public:
  explicit Adam(std::vector<nets::Parameter> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);
  /// Returns the pre-clip global gradient norm.
  double step(double clip_norm);
  void zero_grad();
  const std::vector<nets::Parameter>& parameters() const { return params_; }

 private:
  std::vector<nets::Parameter> params_;
  std::vector<nets::Tensor> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
};

double global_grad_norm(const std::vector<nets::Parameter>& params);

/// Normalized training material indexed by class slot.
class TrainingData {
 public:
  /// `items_by_domain` maps atomic domain names to T x F feature matrices.
  TrainingData(const corpus::DomainSet& domains, std::map<std::string, std::vector<Matrix>> items_by_domain);

  /// Reads `<id>.<kind>.feat` for every training clip, plus `<id>.f0.feat`
  /// when present.
  static TrainingData load(const corpus::Manifest& manifest, const std::filesystem::path& featdir,
                           const corpus::DomainSet& domains, dsp::FeatureKind kind,
                           std::optional<std::uint64_t> expected_hash = std::nullopt);

  const corpus::DomainSet& domains() const { return domains_; }
  int feature_dim() const { return feature_dim_; }
  /// Slots that have at least one clip.
  const std::vector<int>& active_slots() const { return active_; }
  const dsp::NormStats& stats(int slot) const { return stats_.at(static_cast<std::size_t>(slot)); }
  const std::vector<dsp::NormStats>& all_stats() const { return stats_; }
  int shortest_item() const;

  /// Per-slot log-F0 statistics from F0 tracks keyed by atomic domain.
  void set_f0_tracks(const std::map<std::string, std::vector<dsp::F0Track>>& tracks);
  const std::vector<dsp::LogF0Stats>& log_f0_stats() const { return log_f0_; }

  /// Uniform over active slots, then over member domains with data, then
  /// over clips; a random crop of `frames` (tiled when the clip is shorter).
  Batch sample(int size, int frames, std::mt19937_64& rng) const;
  /// Label for each item different from its own, uniform over active slots.
  std::vector<int> other_labels(const std::vector<int>& labels, std::mt19937_64& rng) const;

  /// Every full clip of `slot`'s members, normalized with that slot's stats.
  std::vector<Matrix> normalized_items(int slot) const;

 private:
  corpus::DomainSet domains_;
  std::map<std::string, std::vector<Matrix>> items_;
  std::vector<std::vector<std::string>> members_with_data_;
  std::vector<dsp::NormStats> stats_;
  std::vector<dsp::LogF0Stats> log_f0_;
  std::vector<int> active_;
  int feature_dim_ = 0;
};

/// Either model family behind one handle.
struct TrainedModel {
  Method method = Method::stargan;
  std::unique_ptr<nets::StarGanNets> stargan;
  std::unique_ptr<nets::AcvaeNets> acvae;

  const nets::ModelBundle& bundle() const;
};

TrainedModel make_model(Method method, const nets::NetworkConfig& cfg, int feature_dim, std::uint64_t seed);

struct RunOptions {
  std::optional<std::filesystem::path> rundir;  // config.json, log.csv, checkpoints/
  dsp::AnalysisConfig analysis;                 // recorded in checkpoint metadata
  std::function<void(const LossReport&)> on_step;
};

struct TrainResult {
  TrainedModel model;
  std::vector<LossReport> log;
  std::string metadata;  // as stored in checkpoints
};

/// Seeded training. The same configuration and data produce the same log.
TrainResult train_model(const TrainConfig& cfg, const nets::NetworkConfig& base_arch, const TrainingData& data,
                        const RunOptions& options = {});

/// Fraction of each active slot's full clips the classifier labels correctly
/// (the StarGAN domain classifier or the ACVAE auxiliary classifier).
double classifier_accuracy(const TrainedModel& model, const TrainingData& data);

/// CSV with header "step,term,value"; values printed with 17 significant digits.
std::string format_log_csv(const std::vector<LossReport>& log);

/// Checkpoint metadata document.
struct ModelMetadata {
  Method method = Method::stargan;
  dsp::FeatureKind feature_kind = dsp::FeatureKind::melspec;
  int feature_dim = 0;
  corpus::DomainSet domains;
  std::string arch_text;  // with the kernel delta already applied
  int kernel_delta = 0;
  dsp::AnalysisConfig analysis;
  std::vector<dsp::NormStats> norm;  // per class slot
  std::vector<dsp::LogF0Stats> log_f0;  // per class slot; frames == 0 when unknown
  std::string train_config;          // TrainConfig JSON

  std::string to_json() const;
  static ModelMetadata from_json(const std::string& text);
};

/// Rebuilds networks from a checkpoint and its metadata.
struct LoadedModel {
  ModelMetadata meta;
  TrainedModel model;
  std::uint64_t step = 0;
};
LoadedModel load_model(const std::filesystem::path& checkpoint);

}  // namespace dogvc::train
