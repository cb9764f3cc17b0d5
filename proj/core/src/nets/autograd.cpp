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

#include "dogvc/nets/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace dogvc::nets {

Tensor& Node::grad_buffer() {
  if (!grad.same_shape(value)) grad = Tensor(value.n(), value.c(), value.t());
  return grad;
}

Var constant(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return node;
}

Var parameter(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  return node;
}

Var make_node(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> fn) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  for (const auto& in : inputs) node->requires_grad = node->requires_grad || in->requires_grad;
  if (node->requires_grad) {
    node->inputs = std::move(inputs);
    node->backward_fn = std::move(fn);
  }
  return node;
}

void backward(const Var& loss) {
  if (loss->value.size() != 1) throw Error("backward: loss must have exactly one element");
  if (!loss->requires_grad) return;

  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  // Iterative post-order DFS; deep conv stacks would be fine recursively but
  // long loss sums are not.
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.get(), 0}};
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (n->backward_fn) n->grad = Tensor(n->value.n(), n->value.c(), n->value.t());
  }
  loss->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

double scalar(const Var& v) {
  if (v->value.size() != 1) throw Error("scalar: expected a single element, got " + v->value.shape_string());
  return v->value[0];
}

void zero_grad(const std::vector<Parameter>& params) {
  for (const auto& p : params) p.var->grad_buffer().fill(0.0);
}

std::vector<GradCheckResult> check_gradients(const std::function<Var()>& loss_fn,
                                             const std::vector<Parameter>& params, double step) {
  zero_grad(params);
  backward(loss_fn());
  std::vector<GradCheckResult> results;
  for (const auto& p : params) {
    const Tensor analytic = p.var->grad_buffer();
    auto& values = p.var->value.data();
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double orig = values[i];
      values[i] = orig + step;
      const double up = scalar(loss_fn());
      values[i] = orig - step;
      const double down = scalar(loss_fn());
      values[i] = orig;
      const double numeric = (up - down) / (2.0 * step);
      diff2 += (analytic[i] - numeric) * (analytic[i] - numeric);
      a2 += analytic[i] * analytic[i];
      n2 += numeric * numeric;
    }
    // The floor keeps exactly-zero gradients (e.g. a bias feeding batch
    // norm) from turning finite-difference round-off into a large ratio.
    const double denom = std::max({std::sqrt(a2), std::sqrt(n2), kGradCheckFloor});
    GradCheckResult r;
    r.name = p.name;
    r.grad_norm = std::sqrt(a2);
    r.rel_error = std::sqrt(diff2) / denom;
    results.push_back(r);
  }
  return results;
}

}  // namespace dogvc::nets
