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

#include <cstddef>
#include <string>
#include <vector>

#include "dogvc/common.hpp"

namespace dogvc::nets {

/// Dense (batch, channels, time) array of doubles, time fastest.
/// Feature sequences enter the 1-D networks with their feature bins as
/// channels: a T x F matrix becomes a 1 x F x T tensor.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int c, int t, double fill = 0.0);

  int n() const { return n_; }
  int c() const { return c_; }
  int t() const { return t_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool same_shape(const Tensor& o) const { return n_ == o.n_ && c_ == o.c_ && t_ == o.t_; }
  std::string shape_string() const;

  double& operator()(int n, int c, int t) { return data_[index(n, c, t)]; }
  double operator()(int n, int c, int t) const { return data_[index(n, c, t)]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* row(int n, int c) { return data_.data() + index(n, c, 0); }
  const double* row(int n, int c) const { return data_.data() + index(n, c, 0); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double v);
  /// this += other (same shape).
  void add(const Tensor& other);

  /// T x F matrix -> 1 x F x T.
  static Tensor from_matrix(const Matrix& time_major);
  /// Stacks equally sized T x F matrices into N x F x T.
  static Tensor from_matrices(const std::vector<Matrix>& time_major);
  /// Item `batch` back to T x C.
  Matrix to_matrix(int batch = 0) const;

 private:
  std::size_t index(int n, int c, int t) const {
    return (static_cast<std::size_t>(n) * c_ + c) * t_ + t;
  }

  int n_ = 0, c_ = 0, t_ = 0;
  std::vector<double> data_;
};

/// Height (feature bins), width (frames) and channels of a feature map.
struct TensorShape {
  int height = 1;
  int width = 1;
  int channels = 1;
};

}  // namespace dogvc::nets
