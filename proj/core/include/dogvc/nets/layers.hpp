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
#include <random>
#include <string>
#include <vector>

#include "dogvc/nets/architecture.hpp"
#include "dogvc/nets/ops.hpp"

namespace dogvc::nets {

struct ForwardMode {
  bool training = false;
  bool update_stats = false;

  static ForwardMode train() { return {true, true}; }
  static ForwardMode frozen_train() { return {true, false}; }
  static ForwardMode infer() { return {false, false}; }
};

/// One convolution (or transposed convolution), optional batch norm and an
/// activation. GLU layers produce 2c channels and gate one half with the
/// other. When `cond_dims` > 0 the label planes are concatenated to the
/// layer input.
class ConvLayer {
 public:
  ConvLayer(const LayerSpec& spec, int in_channels, int out_channels, int cond_dims, std::mt19937_64& rng,
            bool zero_init = false);

  /// `onehot` may be null when cond_dims == 0. For deconv layers
  /// `out_len` defaults to T * stride.
  Var forward(const Var& x, const Tensor* onehot, ForwardMode mode, int out_len = -1);

  void collect(const std::string& prefix, std::vector<Parameter>& params);
  void collect_states(const std::string& prefix, std::vector<std::pair<std::string, BatchNormState*>>& out);

  const LayerSpec& spec() const { return spec_; }
  int in_channels() const { return in_channels_; }
  int out_channels() const { return out_channels_; }

 private:
  LayerSpec spec_;
  int in_channels_;
  int out_channels_;
  int cond_dims_;
  Var weight_, bias_, gamma_, beta_;
  BatchNormState bn_;
};

/// A sequential stack of ConvLayers with resolved channel counts.
class ConvStack {
 public:
  ConvStack() = default;
  ConvStack(const std::vector<LayerSpec>& specs, int in_channels, int feature_dim, int latent_dim, int num_domains,
            bool conditioned, std::mt19937_64& rng, bool zero_final = false, bool double_final = false);

  /// Runs all layers. For same-padded stacks the caller is responsible for
  /// input lengths divisible by the stride product.
  Var forward(const Var& x, const Tensor* onehot, ForwardMode mode) const;

  std::vector<Parameter> parameters(const std::string& prefix) const;
  std::vector<std::pair<std::string, BatchNormState*>> bn_states(const std::string& prefix) const;

  int in_channels() const { return in_channels_; }
  int out_channels() const;
  const std::vector<LayerSpec>& specs() const { return specs_; }

 private:
  std::vector<LayerSpec> specs_;
  int in_channels_ = 0;
  // Layers hold mutable batch-norm state; forward() is logically const for
  // weights but updates running statistics in train mode.
  mutable std::vector<ConvLayer> layers_;
};

}  // namespace dogvc::nets
