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

#include "dogvc/nets/networks.hpp"

#include <fmt/format.h>

namespace dogvc::nets {

namespace {

int stride_of(const std::vector<LayerSpec>& specs, LayerKind kind) {
  int p = 1;
  for (const auto& s : specs) {
    if (s.kind == kind) p *= s.stride;
  }
  return p;
}

void require_same_padding(const std::vector<LayerSpec>& specs, Role role) {
  for (const auto& s : specs) {
    if (!s.same_padding) throw Error(to_string(role) + " layers must use pad=same");
  }
}

void require_valid_padding(const std::vector<LayerSpec>& specs, Role role) {
  for (const auto& s : specs) {
    if (s.same_padding || s.kind != LayerKind::conv) throw Error(to_string(role) + " layers must be valid convolutions");
  }
}

void require_features(const Var& x, int feature_dim, const char* what) {
  if (x->value.c() != feature_dim) {
    throw Error(fmt::format("{}: expected {} feature bins, got {}", what, feature_dim, x->value.c()));
  }
}

void require_length(int t, int receptive, const char* what) {
  if (t < receptive) {
    throw Error(fmt::format("{}: input of {} frames is shorter than the receptive field; at least {} frames required",
                            what, t, receptive));
  }
}

GaussianParams split_heads(const Var& h) {
  const int c = h->value.c() / 2;
  return {slice_channels(h, 0, c), slice_channels(h, c, c)};
}

}  // namespace

Generator::Generator(const NetworkConfig& cfg, int feature_dim, std::mt19937_64& rng)
    : feature_dim_(feature_dim) {
  const auto& specs = cfg.specs(Role::generator);
  require_same_padding(specs, Role::generator);
  stride_ = stride_of(specs, LayerKind::conv);
  if (stride_ != stride_of(specs, LayerKind::deconv)) {
    throw Error("generator down- and up-sampling strides do not match");
  }
  stack_ = ConvStack(specs, feature_dim, feature_dim, cfg.latent_dim, cfg.num_domains, true, rng, true);
  if (stack_.out_channels() != feature_dim) throw Error("generator must end with c=F");
}

Var Generator::forward(const Var& x, const Tensor& onehot, ForwardMode mode) const {
  require_features(x, feature_dim_, "generator");
  const int t = x->value.t();
  const int padded = (t + stride_ - 1) / stride_ * stride_;
  Var y = stack_.forward(pad_time(x, 0, padded - t), &onehot, mode);
  return crop_time(y, 0, t);
}

Discriminator::Discriminator(const NetworkConfig& cfg, int feature_dim, std::mt19937_64& rng) {
  const auto& specs = cfg.specs(Role::discriminator);
  require_valid_padding(specs, Role::discriminator);
  stack_ = ConvStack(specs, feature_dim, feature_dim, cfg.latent_dim, cfg.num_domains, true, rng);
  if (stack_.out_channels() != 1) throw Error("discriminator must end with c=1");
}

Var Discriminator::forward(const Var& x, const Tensor& onehot, ForwardMode mode) const {
  require_features(x, stack_.in_channels(), "discriminator");
  require_length(x->value.t(), receptive_field(), "discriminator");
  return stack_.forward(x, &onehot, mode);
}

int Discriminator::receptive_field() const { return nets::receptive_field(stack_.specs()); }

int Discriminator::output_length(int input_length) const { return valid_output_length(stack_.specs(), input_length); }

DomainClassifier::DomainClassifier(const std::vector<LayerSpec>& specs, const NetworkConfig& cfg, int feature_dim,
                                   std::mt19937_64& rng) {
  require_valid_padding(specs, Role::classifier);
  stack_ = ConvStack(specs, feature_dim, feature_dim, cfg.latent_dim, cfg.num_domains, false, rng);
  if (stack_.out_channels() != cfg.num_domains) throw Error("classifier must end with c=D");
}

Var DomainClassifier::logits(const Var& x, ForwardMode mode) const {
  require_features(x, stack_.in_channels(), "classifier");
  require_length(x->value.t(), receptive_field(), "classifier");
  return mean_time(stack_.forward(x, nullptr, mode));
}

Tensor DomainClassifier::probabilities(const Tensor& x) const {
  return softmax(logits(constant(x), ForwardMode::infer())->value);
}

int DomainClassifier::receptive_field() const { return nets::receptive_field(stack_.specs()); }

Encoder::Encoder(const NetworkConfig& cfg, int feature_dim, std::mt19937_64& rng) : feature_dim_(feature_dim) {
  const auto& specs = cfg.specs(Role::encoder);
  require_same_padding(specs, Role::encoder);
  for (const auto& s : specs) {
    if (s.kind != LayerKind::conv) throw Error("encoder layers must be conv");
  }
  stride_ = total_stride(specs);
  stack_ = ConvStack(specs, feature_dim, feature_dim, cfg.latent_dim, cfg.num_domains, true, rng, false, true);
  if (stack_.out_channels() != 2 * cfg.latent_dim) throw Error("encoder must end with c=Z");
}

GaussianParams Encoder::forward(const Var& x, const Tensor& onehot, ForwardMode mode) const {
  require_features(x, feature_dim_, "encoder");
  const int t = x->value.t();
  const int padded = (t + stride_ - 1) / stride_ * stride_;
  return split_heads(stack_.forward(pad_time(x, 0, padded - t), &onehot, mode));
}

Decoder::Decoder(const NetworkConfig& cfg, int feature_dim, std::mt19937_64& rng) : feature_dim_(feature_dim) {
  const auto& specs = cfg.specs(Role::decoder);
  require_same_padding(specs, Role::decoder);
  stride_ = stride_of(specs, LayerKind::deconv) / stride_of(specs, LayerKind::conv);
  stack_ = ConvStack(specs, cfg.latent_dim, feature_dim, cfg.latent_dim, cfg.num_domains, true, rng, false, true);
  if (stack_.out_channels() != 2 * feature_dim) throw Error("decoder must end with c=F");
}

GaussianParams Decoder::forward(const Var& z, const Tensor& onehot, ForwardMode mode, int out_len) const {
  if (z->value.c() != stack_.in_channels()) {
    throw Error(fmt::format("decoder: expected {} latent channels, got {}", stack_.in_channels(), z->value.c()));
  }
  Var h = stack_.forward(z, &onehot, mode);
  if (out_len > h->value.t()) {
    throw Error(fmt::format("decoder: requested {} frames from {} latent frames", out_len, z->value.t()));
  }
  return split_heads(crop_time(h, 0, out_len));
}

StarGanNets::StarGanNets(const NetworkConfig& c, int feature_dim, std::uint64_t seed)
    : StarGanNets(c, feature_dim, std::mt19937_64(seed)) {}

StarGanNets::StarGanNets(const NetworkConfig& c, int feature_dim, std::mt19937_64&& rng)
    : cfg(c),
      features(feature_dim),
      generator(c, feature_dim, rng),
      discriminator(c, feature_dim, rng),
      classifier(c.specs(Role::classifier), c, feature_dim, rng) {}

std::vector<Parameter> StarGanNets::generator_parameters() const { return generator.stack().parameters("generator"); }

std::vector<Parameter> StarGanNets::critic_parameters() const {
  auto out = discriminator.stack().parameters("discriminator");
  auto c = classifier.stack().parameters("classifier");
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

std::vector<Parameter> StarGanNets::parameters() const {
  auto out = generator_parameters();
  auto c = critic_parameters();
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

NamedStates StarGanNets::bn_states() const {
  NamedStates out = generator.stack().bn_states("generator");
  for (auto& s : discriminator.stack().bn_states("discriminator")) out.push_back(s);
  for (auto& s : classifier.stack().bn_states("classifier")) out.push_back(s);
  return out;
}

AcvaeNets::AcvaeNets(const NetworkConfig& c, int feature_dim, std::uint64_t seed)
    : AcvaeNets(c, feature_dim, std::mt19937_64(seed)) {}

AcvaeNets::AcvaeNets(const NetworkConfig& c, int feature_dim, std::mt19937_64&& rng)
    : cfg(c),
      features(feature_dim),
      encoder(c, feature_dim, rng),
      decoder(c, feature_dim, rng),
      aux_classifier(c.specs(Role::aux_classifier), c, feature_dim, rng) {
  if (encoder.stride() != decoder.stride()) throw Error("encoder and decoder strides do not match");
}

std::vector<Parameter> AcvaeNets::vae_parameters() const {
  auto out = encoder.stack().parameters("encoder");
  auto d = decoder.stack().parameters("decoder");
  out.insert(out.end(), d.begin(), d.end());
  return out;
}

std::vector<Parameter> AcvaeNets::aux_parameters() const { return aux_classifier.stack().parameters("aux_classifier"); }

std::vector<Parameter> AcvaeNets::parameters() const {
  auto out = vae_parameters();
  auto a = aux_parameters();
  out.insert(out.end(), a.begin(), a.end());
  return out;
}

NamedStates AcvaeNets::bn_states() const {
  NamedStates out = encoder.stack().bn_states("encoder");
  for (auto& s : decoder.stack().bn_states("decoder")) out.push_back(s);
  for (auto& s : aux_classifier.stack().bn_states("aux_classifier")) out.push_back(s);
  return out;
}

Tensor onehot_batch(const std::vector<int>& labels, int num_domains) {
  Tensor out(static_cast<int>(labels.size()), num_domains, 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_domains) throw Error(fmt::format("label {} out of range", labels[i]));
    out(static_cast<int>(i), labels[i], 0) = 1.0;
  }
  return out;
}

}  // namespace dogvc::nets
