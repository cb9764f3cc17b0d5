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

#include "dogvc/train.hpp"

namespace dogvc::train {

double global_grad_norm(const std::vector<nets::Parameter>& params) {
  double sq = 0.0;
  for (const auto& p : params) {
    for (double g : p.var->grad.data()) sq += g * g;
  }
  return std::sqrt(sq);
}

Adam::Adam(std::vector<nets::Parameter> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (lr <= 0) throw Error("learning rate must be positive");
  for (const auto& p : params_) {
    const auto& v = p.var->value;
    m_.emplace_back(v.n(), v.c(), v.t());
    v_.emplace_back(v.n(), v.c(), v.t());
  }
}

void Adam::zero_grad() { nets::zero_grad(params_); }

double Adam::step(double clip_norm) {
  const double norm = global_grad_norm(params_);
  const double factor = clip_norm > 0 && norm > clip_norm ? clip_norm / norm : 1.0;
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& node = *params_[i].var;
    if (node.grad.empty()) continue;
    auto& m = m_[i].data();
    auto& v = v_[i].data();
    auto& w = node.value.data();
    const auto& g = node.grad.data();
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double gj = g[j] * factor;
      m[j] = beta1_ * m[j] + (1 - beta1_) * gj;
      v[j] = beta2_ * v[j] + (1 - beta2_) * gj * gj;
      w[j] -= lr_ * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_);
    }
  }
  return norm;
}

}  // namespace dogvc::train
