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

#include "dogvc/nets/tensor.hpp"

#include <algorithm>

namespace dogvc::nets {

Tensor::Tensor(int n, int c, int t, double fill)
    : n_(n), c_(c), t_(t), data_(static_cast<std::size_t>(n) * c * t, fill) {
  if (n < 0 || c < 0 || t < 0) throw Error("tensor dimensions must be non-negative");
}

std::string Tensor::shape_string() const {
  return "(" + std::to_string(n_) + "," + std::to_string(c_) + "," + std::to_string(t_) + ")";
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::add(const Tensor& other) {
  if (!same_shape(other)) throw Error("tensor add: shape " + shape_string() + " vs " + other.shape_string());
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
}

Tensor Tensor::from_matrix(const Matrix& m) {
  Tensor out(1, static_cast<int>(m.cols()), static_cast<int>(m.rows()));
  for (int c = 0; c < out.c(); ++c) {
    for (int t = 0; t < out.t(); ++t) out(0, c, t) = m(t, c);
  }
  return out;
}

Tensor Tensor::from_matrices(const std::vector<Matrix>& ms) {
  if (ms.empty()) throw Error("from_matrices: empty batch");
  const auto rows = ms.front().rows(), cols = ms.front().cols();
  Tensor out(static_cast<int>(ms.size()), static_cast<int>(cols), static_cast<int>(rows));
  for (int n = 0; n < out.n(); ++n) {
    if (ms[n].rows() != rows || ms[n].cols() != cols) throw Error("from_matrices: ragged batch");
    for (int c = 0; c < out.c(); ++c) {
      for (int t = 0; t < out.t(); ++t) out(n, c, t) = ms[n](t, c);
    }
  }
  return out;
}

Matrix Tensor::to_matrix(int batch) const {
  Matrix m(t_, c_);
  for (int c = 0; c < c_; ++c) {
    for (int t = 0; t < t_; ++t) m(t, c) = (*this)(batch, c, t);
  }
  return m;
}

}  // namespace dogvc::nets
