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

#include "dogvc/dsp/fft.hpp"

#include <algorithm>

#include <unsupported/Eigen/FFT>

#include "dogvc/common.hpp"

namespace dogvc::dsp {

namespace {

// Eigen::FFT caches twiddles per object; one per thread keeps calls reentrant.
Eigen::FFT<double>& engine() {
  thread_local Eigen::FFT<double> fft = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    return f;
  }();
  return fft;
}

}  // namespace

std::vector<std::complex<double>> rfft(std::span<const double> input, int n) {
  if (n <= 0) throw Error("rfft: length must be positive");
  std::vector<double> buf(static_cast<std::size_t>(n), 0.0);
  std::copy_n(input.begin(), std::min<std::size_t>(input.size(), buf.size()), buf.begin());
  std::vector<std::complex<double>> out;
  engine().fwd(out, buf);
  out.resize(static_cast<std::size_t>(n / 2 + 1));
  return out;
}

std::vector<double> irfft(std::span<const std::complex<double>> half_spectrum, int n) {
  if (n <= 0) throw Error("irfft: length must be positive");
  if (half_spectrum.size() != static_cast<std::size_t>(n / 2 + 1)) {
    throw Error("irfft: expected n/2+1 bins");
  }
  std::vector<std::complex<double>> in(half_spectrum.begin(), half_spectrum.end());
  std::vector<double> out;
  engine().inv(out, in, n);
  return out;
}

}  // namespace dogvc::dsp
