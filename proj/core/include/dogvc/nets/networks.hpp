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
#include <string>
#include <utility>
#include <vector>

#include "dogvc/nets/layers.hpp"

namespace dogvc::nets {

/// Mean and log-variance heads, each N x C x T.
struct GaussianParams {
  Var mean;
  Var logvar;
};

/// Conditional encoder-decoder mapping N x F x T features to the same shape.
/// Inputs are zero-padded at the end to a multiple of the stride product and
/// the output is cropped back.
class Generator {
 public:
  Generator(const NetworkConfig& cfg, int feature_dim, std::mt19937_64& rng);
  Var forward(const Var& x, const Tensor& onehot, ForwardMode mode) const;
  const ConvStack& stack() const { return stack_; }
  int feature_dim() const { return feature_dim_; }

 private:
  ConvStack stack_;
  int feature_dim_;
  int stride_;
};

/// Conditional patch discriminator: N x F x T -> N x 1 x T' real/fake logits.
class Discriminator {
 public:
  Discriminator(const NetworkConfig& cfg, int feature_dim, std::mt19937_64& rng);
  Var forward(const Var& x, const Tensor& onehot, ForwardMode mode) const;
  int receptive_field() const;
  int output_length(int input_length) const;
  const ConvStack& stack() const { return stack_; }

 private:
  ConvStack stack_;
};

/// Unconditional domain classifier: N x F x T -> N x D x 1 logits (time-averaged).
class DomainClassifier {
 public:
  DomainClassifier(const std::vector<LayerSpec>& specs, const NetworkConfig& cfg, int feature_dim,
                   std::mt19937_64& rng);
  Var logits(const Var& x, ForwardMode mode) const;
  /// Softmax over domains for each batch item.
  Tensor probabilities(const Tensor& x) const;
  int receptive_field() const;
  const ConvStack& stack() const { return stack_; }

 private:
  ConvStack stack_;
};

class Encoder {
 public:
  Encoder(const NetworkConfig& cfg, int feature_dim, std::mt19937_64& rng);
  /// N x F x T -> N x Z x ceil(T / stride) parameters.
  GaussianParams forward(const Var& x, const Tensor& onehot, ForwardMode mode) const;
  int stride() const { return stride_; }
  const ConvStack& stack() const { return stack_; }

 private:
  ConvStack stack_;
  int feature_dim_;
  int stride_;
};

class Decoder {
 public:
  Decoder(const NetworkConfig& cfg, int feature_dim, std::mt19937_64& rng);
  /// N x Z x T' -> N x F x out_len parameters (out_len <= T' * stride).
  GaussianParams forward(const Var& z, const Tensor& onehot, ForwardMode mode, int out_len) const;
  int stride() const { return stride_; }
  const ConvStack& stack() const { return stack_; }

 private:
  ConvStack stack_;
  int feature_dim_;
  int stride_;
};

using NamedStates = std::vector<std::pair<std::string, BatchNormState*>>;

/// Everything a checkpoint needs from a model family.
class ModelBundle {
 public:
  virtual ~ModelBundle() = default;
  virtual std::string method() const = 0;
  virtual std::vector<Parameter> parameters() const = 0;
  virtual NamedStates bn_states() const = 0;
  virtual const NetworkConfig& config() const = 0;
  virtual int feature_dim() const = 0;
};

struct StarGanNets : ModelBundle {
  StarGanNets(const NetworkConfig& cfg, int feature_dim, std::uint64_t seed);

  std::string method() const override { return "stargan"; }
  std::vector<Parameter> parameters() const override;
  std::vector<Parameter> generator_parameters() const;
  std::vector<Parameter> critic_parameters() const;  // discriminator + classifier
  NamedStates bn_states() const override;
  const NetworkConfig& config() const override { return cfg; }
  int feature_dim() const override { return features; }

  NetworkConfig cfg;
  int features;
  Generator generator;
  Discriminator discriminator;
  DomainClassifier classifier;

 private:
  StarGanNets(const NetworkConfig& cfg, int feature_dim, std::mt19937_64&& rng);
};

struct AcvaeNets : ModelBundle {
  AcvaeNets(const NetworkConfig& cfg, int feature_dim, std::uint64_t seed);

  std::string method() const override { return "acvae"; }
  std::vector<Parameter> parameters() const override;
  std::vector<Parameter> vae_parameters() const;
  std::vector<Parameter> aux_parameters() const;
  NamedStates bn_states() const override;
  const NetworkConfig& config() const override { return cfg; }
  int feature_dim() const override { return features; }

  NetworkConfig cfg;
  int features;
  Encoder encoder;
  Decoder decoder;
  DomainClassifier aux_classifier;

 private:
  AcvaeNets(const NetworkConfig& cfg, int feature_dim, std::mt19937_64&& rng);
};

/// Batch of one-hot rows (N x D x 1).
Tensor onehot_batch(const std::vector<int>& labels, int num_domains);

}  // namespace dogvc::nets
