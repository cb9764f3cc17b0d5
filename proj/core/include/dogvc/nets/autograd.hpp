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

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dogvc/nets/tensor.hpp"

namespace dogvc::nets {

struct Node;
using Var = std::shared_ptr<Node>;

/// One value on the reverse-mode tape. Ops create nodes holding their inputs
/// and a closure that pushes `grad` into the inputs' grads.
struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<Var> inputs;
  std::function<void(Node&)> backward_fn;

  Tensor& grad_buffer();
};

/// Leaf without gradient.
Var constant(Tensor value);
/// Trainable leaf.
Var parameter(Tensor value);

/// Op helper: requires_grad is inherited from the inputs; `fn` runs only
/// when some input needs a gradient.
Var make_node(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> fn);

/// Seeds d(loss)/d(loss) = 1 for a single-element `loss` and propagates
/// through the graph in reverse topological order.
void backward(const Var& loss);

/// Scalar value of a single-element Var.
double scalar(const Var& v);

struct Parameter {
  std::string name;
  Var var;
};

void zero_grad(const std::vector<Parameter>& params);

inline constexpr double kGradCheckFloor = 1e-6;

struct GradCheckResult {
  std::string name;
  double rel_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||, kGradCheckFloor)
  double grad_norm = 0.0;
};

/// Central finite differences against backward() for every element of every
/// parameter. `loss_fn` must rebuild the graph from the current parameter
/// values and be deterministic.
std::vector<GradCheckResult> check_gradients(const std::function<Var()>& loss_fn,
                                             const std::vector<Parameter>& params, double step = 1e-5);

}  // namespace dogvc::nets
