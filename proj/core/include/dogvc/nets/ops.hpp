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

#include <span>
#include <vector>

#include "dogvc/nets/autograd.hpp"

namespace dogvc::nets {

// Elementwise ------------------------------------------------------------

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var sigmoid(const Var& a);
Var exp(const Var& a);
/// Weighted sum of single-element Vars.
Var weighted_sum(const std::vector<Var>& terms, const std::vector<double>& weights);

/// Gated linear unit a * sigmoid(b); shapes must match.
Var glu(const Var& a, const Var& b);

// Layout -----------------------------------------------------------------

Var slice_channels(const Var& x, int begin, int count);
Var concat_channels(const Var& a, const Var& b);
/// Appends the per-item one-hot rows of `onehot` (N x D x 1) as D channels
/// that are constant over time.
Var condition_concat(const Var& x, const Tensor& onehot);
Var pad_time(const Var& x, int left, int right);
Var crop_time(const Var& x, int begin, int length);
/// N x C x T -> N x C x 1.
Var mean_time(const Var& x);

// Convolution ------------------------------------------------------------

/// weight: Cout x Cin x K, bias: 1 x Cout x 1. Output length
/// floor((T + pad_left + pad_right - K) / stride) + 1.
Var conv1d(const Var& x, const Var& weight, const Var& bias, int stride, int pad_left, int pad_right);

/// weight: Cin x Cout x K, bias: 1 x Cout x 1. Output position
/// t*stride + k - crop_left, keeping [0, out_len).
Var conv_transpose1d(const Var& x, const Var& weight, const Var& bias, int stride, int crop_left,
                     int out_len);

// Normalization ----------------------------------------------------------

struct BatchNormState {
  Tensor running_mean;  // 1 x C x 1
  Tensor running_var;   // 1 x C x 1
  double momentum = 0.1;
  double eps = 1e-5;
};

/// Per-channel normalization over (batch, time). Training mode uses batch
/// statistics and (optionally) updates the running estimates; inference
/// mode uses the running estimates.
Var batch_norm(const Var& x, const Var& gamma, const Var& beta, BatchNormState& state, bool training,
               bool update_stats);

// Stochastic layer -------------------------------------------------------

/// z = mean + exp(logvar / 2) * eps.
Var reparameterize(const Var& mean, const Var& logvar, const Tensor& eps);

// Losses (single-element results) -----------------------------------------

/// Mean |a - b| over all elements.
Var l1_loss(const Var& a, const Var& b);
/// Mean sigmoid cross-entropy of every logit against a constant target.
Var bce_with_logits(const Var& logits, double target);
/// logits: N x D x 1. Mean over the batch of -log softmax(logits)[label].
Var softmax_cross_entropy(const Var& logits, const std::vector<int>& labels);
/// 1/2 sum_d [logvar + (x - mean)^2 / exp(logvar) + log 2pi], averaged over
/// frames (batch items x time steps).
Var gaussian_nll(const Tensor& x, const Var& mean, const Var& logvar);
Var gaussian_nll(const Var& x, const Var& mean, const Var& logvar);
/// KL(N(mean, exp(logvar)) || N(0, 1)) summed over dims, averaged over frames.
Var kl_standard_normal(const Var& mean, const Var& logvar);

// Non-differentiable helpers ------------------------------------------------

/// Row-wise softmax of N x D x 1 logits.
Tensor softmax(const Tensor& logits);

/// Closed-form KL(N(mean, diag(var)) || N(0, I)) for one latent vector.
double kl_diag_gaussian(std::span<const double> mean, std::span<const double> var);

}  // namespace dogvc::nets
