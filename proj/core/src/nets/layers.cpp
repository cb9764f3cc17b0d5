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

#include "dogvc/nets/layers.hpp"

#include <cmath>

#include <fmt/format.h>

namespace dogvc::nets {

ConvLayer::ConvLayer(const LayerSpec& spec, int in_channels, int out_channels, int cond_dims, std::mt19937_64& rng,
                     bool zero_init)
    : spec_(spec), in_channels_(in_channels), out_channels_(out_channels), cond_dims_(cond_dims) {
  spec_.validate();
  const int conv_out = spec.activation == Activation::glu ? 2 * out_channels : out_channels;
  const int cin = in_channels + cond_dims;
  Tensor w = spec.kind == LayerKind::conv ? Tensor(conv_out, cin, spec.kernel) : Tensor(cin, conv_out, spec.kernel);
  if (!zero_init) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cin * spec.kernel));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : w.data()) v = dist(rng);
  }
  weight_ = parameter(std::move(w));
  bias_ = parameter(Tensor(1, conv_out, 1));
  if (spec.norm == Norm::batch) {
    gamma_ = parameter(Tensor(1, conv_out, 1, 1.0));
    beta_ = parameter(Tensor(1, conv_out, 1));
    bn_.running_mean = Tensor(1, conv_out, 1, 0.0);
    bn_.running_var = Tensor(1, conv_out, 1, 1.0);
  }
}

Var ConvLayer::forward(const Var& x, const Tensor* onehot, ForwardMode mode, int out_len) {
  if (x->value.c() != in_channels_) {
    throw Error(fmt::format("layer expects {} input channels, got {}", in_channels_, x->value.c()));
  }
  Var h = x;
  if (cond_dims_ > 0) {
    if (!onehot || onehot->c() != cond_dims_) {
      throw Error(fmt::format("layer expects a {}-way domain label", cond_dims_));
    }
    h = condition_concat(h, *onehot);
  }
  const int k = spec_.kernel, s = spec_.stride;
  if (spec_.kind == LayerKind::conv) {
    const int pad = spec_.same_padding ? k - 1 : 0;
    h = conv1d(h, weight_, bias_, s, pad / 2, pad - pad / 2);
  } else {
    const int len = out_len > 0 ? out_len : h->value.t() * s;
    h = conv_transpose1d(h, weight_, bias_, s, k > s ? (k - s) / 2 : 0, len);
  }
  if (spec_.norm == Norm::batch) h = batch_norm(h, gamma_, beta_, bn_, mode.training, mode.update_stats);
  switch (spec_.activation) {
    case Activation::glu:
      return glu(slice_channels(h, 0, out_channels_), slice_channels(h, out_channels_, out_channels_));
    case Activation::sigmoid:
      return sigmoid(h);
    case Activation::none:
      break;
  }
  return h;
}

void ConvLayer::collect(const std::string& prefix, std::vector<Parameter>& params) {
  params.push_back({prefix + ".weight", weight_});
  params.push_back({prefix + ".bias", bias_});
  if (gamma_) {
    params.push_back({prefix + ".bn.gamma", gamma_});
    params.push_back({prefix + ".bn.beta", beta_});
  }
}

void ConvLayer::collect_states(const std::string& prefix,
                               std::vector<std::pair<std::string, BatchNormState*>>& out) {
  if (spec_.norm == Norm::batch) out.emplace_back(prefix + ".bn", &bn_);
}

ConvStack::ConvStack(const std::vector<LayerSpec>& specs, int in_channels, int feature_dim, int latent_dim,
                     int num_domains, bool conditioned, std::mt19937_64& rng, bool zero_final, bool double_final)
    : specs_(specs), in_channels_(in_channels) {
  if (specs.empty()) throw Error("network has no layers");
  int c = in_channels;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const bool last = i + 1 == specs.size();
    int out = specs[i].channels.resolve(feature_dim, latent_dim, num_domains);
    if (last && double_final) out *= 2;
    layers_.emplace_back(specs[i], c, out, conditioned ? num_domains : 0, rng, last && zero_final);
    c = out;
  }
}

Var ConvStack::forward(const Var& x, const Tensor* onehot, ForwardMode mode) const {
  Var h = x;
  for (auto& layer : layers_) h = layer.forward(h, onehot, mode);
  return h;
}

std::vector<Parameter> ConvStack::parameters(const std::string& prefix) const {
  std::vector<Parameter> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i].collect(fmt::format("{}.{}", prefix, i), out);
  return out;
}

std::vector<std::pair<std::string, BatchNormState*>> ConvStack::bn_states(const std::string& prefix) const {
  std::vector<std::pair<std::string, BatchNormState*>> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i].collect_states(fmt::format("{}.{}", prefix, i), out);
  return out;
}

int ConvStack::out_channels() const { return layers_.empty() ? 0 : layers_.back().out_channels(); }

}  // namespace dogvc::nets
