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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dogvc/nets/ops.hpp"
#include "gradcheck_cases.hpp"

using namespace dogvc;

class PrimitiveGradients : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(PrimitiveGradients, MatchCentralDifferences) {
  for (const auto& c : fixtures::primitive_gradient_cases(GetParam())) {
    EXPECT_LT(c.max_rel_error, 1e-4) << c.name;
    EXPECT_GT(c.min_grad_norm, 0.0) << c.name;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, PrimitiveGradients, ::testing::Values(1u, 2u, 3u));

TEST(LossGradients, MatchCentralDifferences) {
  for (const auto& c : fixtures::loss_gradient_cases(11)) {
    EXPECT_LT(c.max_rel_error, 1e-4) << c.name;
  }
}

TEST(KlClosedForm, KnownValuesAndNonNegativity) {
  const double zero[] = {0.0}, one[] = {1.0};
  EXPECT_NEAR(nets::kl_diag_gaussian(zero, one), 0.0, 1e-9);
  EXPECT_NEAR(nets::kl_diag_gaussian(one, one), 0.5, 1e-9);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> mu(0.0, 2.0);
  std::uniform_real_distribution<double> lv(-4.0, 4.0);
  for (int i = 0; i < 10000; ++i) {
    const double m[] = {mu(rng), mu(rng)}, v[] = {std::exp(lv(rng)), std::exp(lv(rng))};
    ASSERT_GE(nets::kl_diag_gaussian(m, v), 0.0);
  }
  EXPECT_THROW(nets::kl_diag_gaussian(one, zero), Error);
}

TEST(KlClosedForm, AgreesWithTapeVersion) {
  nets::Tensor m(1, 2, 1), lv(1, 2, 1);
  m[0] = 0.3;
  m[1] = -1.2;
  lv[0] = 0.5;
  lv[1] = -0.7;
  const double means[] = {0.3, -1.2}, vars[] = {std::exp(0.5), std::exp(-0.7)};
  const double tape = nets::scalar(nets::kl_standard_normal(nets::constant(m), nets::constant(lv)));
  EXPECT_NEAR(tape, nets::kl_diag_gaussian(means, vars), 1e-12);
}

TEST(Softmax, RowsSumToOne) {
  nets::Tensor logits(2, 4, 1);
  for (std::size_t i = 0; i < logits.size(); ++i) logits[i] = 100.0 * static_cast<double>(i % 3);
  const auto p = nets::softmax(logits);
  for (int n = 0; n < 2; ++n) {
    double s = 0.0;
    for (int d = 0; d < 4; ++d) s += p(n, d, 0);
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(GaussianNll, ValuesAgainstScalarLoop) {
  const double log2pi = std::log(2.0 * M_PI);
  nets::Tensor x(2, 5, 3, 0.7);
  // x = mean and unit variance: half of D log 2 pi per frame.
  EXPECT_NEAR(nets::scalar(nets::gaussian_nll(x, nets::constant(x), nets::constant(nets::Tensor(2, 5, 3, 0.0)))),
              0.5 * 5 * log2pi, 1e-12);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  nets::Tensor m(2, 5, 3), lv(2, 5, 3);
  for (auto* t : {&x, &m, &lv}) {
    for (auto& v : t->data()) v = g(rng);
  }
  double want = 0.0;
  for (int n = 0; n < 2; ++n) {
    for (int c = 0; c < 5; ++c) {
      for (int t = 0; t < 3; ++t) {
        const double d = x(n, c, t) - m(n, c, t);
        want += 0.5 * (lv(n, c, t) + d * d / std::exp(lv(n, c, t)) + log2pi);
      }
    }
  }
  want /= 2 * 3;
  EXPECT_NEAR(nets::scalar(nets::gaussian_nll(x, nets::constant(m), nets::constant(lv))), want, 1e-9);

  // Moving the mean away with the variance fixed only increases the NLL.
  double prev = -INFINITY;
  for (double off : {0.0, 0.5, 1.0, 2.0}) {
    nets::Tensor shifted = x;
    for (auto& v : shifted.data()) v += off;
    const double nll = nets::scalar(nets::gaussian_nll(shifted, nets::constant(x), nets::constant(lv)));
    EXPECT_GT(nll, prev);
    prev = nll;
  }
}
