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

#include <random>

#include "dogvc/nets/checkpoint.hpp"
#include "dogvc/nets/networks.hpp"
#include "toy.hpp"

using namespace dogvc;
using namespace dogvc::nets;
using dogvc::fixtures::TempDir;

namespace {

NetworkConfig default_arch() { return load_architecture(fixtures::config_path("arch/default.arch")); }

// Plain re-derivation: each valid layer maps T -> floor((T - k) / s) + 1.
int composed_length(const std::vector<LayerSpec>& specs, int t) {
  for (const auto& l : specs) {
    if (t < l.kernel) return 0;
    t = (t - l.kernel) / l.stride + 1;
  }
  return t;
}

// Smallest input with a non-empty output, found by search.
int searched_receptive_field(const std::vector<LayerSpec>& specs) {
  int t = 1;
  while (composed_length(specs, t) == 0) ++t;
  return t;
}

Tensor random_input(int n, int f, int t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Tensor x(n, f, t);
  for (auto& v : x.data()) v = g(rng);
  return x;
}

}  // namespace

TEST(Architecture, ParsesAndRoundTripsText) {
  const auto cfg = default_arch();
  for (Role r : kAllRoles) EXPECT_FALSE(cfg.specs(r).empty()) << to_string(r);
  const auto again = parse_architecture(cfg.to_text());
  EXPECT_EQ(again.to_text(), cfg.to_text());
  EXPECT_EQ(again.hash(80), cfg.hash(80));
  EXPECT_NE(cfg.hash(80), cfg.hash(36));
}

TEST(Architecture, RejectsMalformedText) {
  EXPECT_THROW(parse_architecture("[generator]\nconv k=0 c=4 s=1 norm=none act=none pad=same\n"), Error);
  EXPECT_THROW(parse_architecture("[nowhere]\nconv k=3 c=4 s=1 norm=none act=none pad=same\n"), Error);
  EXPECT_THROW(parse_architecture("[generator]\ndeconv k=4 c=4 s=2 norm=none act=none pad=valid\n"), Error);
  EXPECT_THROW(parse_architecture("[generator]\nconv k=3 c=4 s=1 bogus=1\n"), Error);
}

TEST(Architecture, DeltaRangeAndFloor) {
  const auto cfg = default_arch();
  EXPECT_THROW(build_with_kernel_delta(cfg, 3), Error);
  EXPECT_THROW(build_with_kernel_delta(cfg, -3), Error);
  const auto plus = build_with_kernel_delta(cfg, 2);
  EXPECT_EQ(plus.kernel_delta, 2);
  // Only tunable kernels move; the generator is untouched by default.
  EXPECT_EQ(plus.specs(Role::generator)[0].kernel, cfg.specs(Role::generator)[0].kernel);
  for (std::size_t i = 0; i < cfg.specs(Role::discriminator).size(); ++i) {
    const auto& a = cfg.specs(Role::discriminator)[i];
    const auto& b = plus.specs(Role::discriminator)[i];
    EXPECT_EQ(b.kernel, a.kernel + (a.kernel_tunable ? 2 : 0));
  }
}

class DeltaSweep : public ::testing::TestWithParam<int> {};

TEST_P(DeltaSweep, CriticShapesMatchComposedFormula) {
  const int delta = GetParam();
  auto cfg = build_with_kernel_delta(default_arch(), delta);
  const int f = 16;
  StarGanNets nets(cfg, f, 3);
  for (Role role : {Role::discriminator, Role::classifier}) {
    const auto& specs = cfg.specs(role);
    EXPECT_EQ(receptive_field(specs), searched_receptive_field(specs)) << to_string(role);
    for (int t : {receptive_field(specs), 64, 129}) {
      EXPECT_EQ(valid_output_length(specs, t), composed_length(specs, t));
    }
  }
  const int t = 100;
  const Tensor onehot = onehot_batch({0, 3}, cfg.num_domains);
  const auto d = nets.discriminator.forward(constant(random_input(2, f, t, 1)), onehot, ForwardMode::infer());
  EXPECT_EQ(d->value.n(), 2);
  EXPECT_EQ(d->value.c(), 1);
  EXPECT_EQ(d->value.t(), composed_length(cfg.specs(Role::discriminator), t));
  EXPECT_EQ(nets.discriminator.output_length(t), d->value.t());
  const auto logits = nets.classifier.logits(constant(random_input(2, f, t, 2)), ForwardMode::infer());
  EXPECT_EQ(logits->value.c(), cfg.num_domains);
  EXPECT_EQ(logits->value.t(), 1);

  const int rf = nets.discriminator.receptive_field();
  EXPECT_NO_THROW(nets.discriminator.forward(constant(random_input(1, f, rf, 3)), onehot_batch({0}, 6),
                                             ForwardMode::infer()));
  EXPECT_THROW(nets.discriminator.forward(constant(random_input(1, f, rf - 1, 3)), onehot_batch({0}, 6),
                                          ForwardMode::infer()),
               Error);
}

TEST_P(DeltaSweep, GeneratorPreservesLength) {
  auto cfg = build_with_kernel_delta(default_arch(), GetParam());
  cfg.delta_on_generator = true;
  const int f = 12;
  StarGanNets nets(cfg, f, 5);
  for (int t : {1, 7, 32, 33, 50}) {
    const auto y = nets.generator.forward(constant(random_input(1, f, t, t)), onehot_batch({2}, 6),
                                          ForwardMode::infer());
    EXPECT_EQ(y->value.t(), t);
    EXPECT_EQ(y->value.c(), f);
  }
}

INSTANTIATE_TEST_SUITE_P(Deltas, DeltaSweep, ::testing::Values(-2, -1, 0, 1, 2));

TEST(Architecture, ReceptiveFieldStrictlyIncreasesWithDelta) {
  const auto base = default_arch();
  for (Role role : {Role::discriminator, Role::classifier}) {
    int prev = 0;
    for (int d = -2; d <= 2; ++d) {
      const int rf = receptive_field(build_with_kernel_delta(base, d), role);
      EXPECT_GT(rf, prev) << to_string(role) << " delta " << d;
      prev = rf;
    }
  }
}

TEST(Architecture, AcvaeShapes) {
  const auto cfg = fixtures::toy_arch();
  AcvaeNets nets(cfg, 10, 1);
  const Tensor onehot = onehot_batch({1}, cfg.num_domains);
  for (int t : {5, 16, 31}) {
    const auto q = nets.encoder.forward(constant(random_input(1, 10, t, 4)), onehot, ForwardMode::infer());
    EXPECT_EQ(q.mean->value.c(), cfg.latent_dim);
    const auto p = nets.decoder.forward(q.mean, onehot, ForwardMode::infer(), t);
    EXPECT_EQ(p.mean->value.t(), t);
    EXPECT_EQ(p.mean->value.c(), 10);
    EXPECT_EQ(p.logvar->value.c(), 10);
  }
}

TEST(Checkpoint, RoundTripRestoresOutputs) {
  TempDir dir("ckpt");
  const auto cfg = fixtures::toy_arch();
  StarGanNets a(cfg, 8, 1), b(cfg, 8, 2);
  // Move running statistics away from their initial values.
  for (int i = 0; i < 3; ++i) {
    a.generator.forward(constant(random_input(4, 8, 20, i)), onehot_batch({0, 1, 2, 3}, 6), ForwardMode::train());
  }
  save_checkpoint(dir / "m.ckpt", a, 42, R"({"note":"x"})");
  const auto ck = read_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(ck.step, 42u);
  EXPECT_EQ(ck.num_domains, 6);
  EXPECT_EQ(ck.metadata, R"({"note":"x"})");
  restore(ck, b);
  const Tensor x = random_input(1, 8, 24, 9);
  const auto ya = a.generator.forward(constant(x), onehot_batch({4}, 6), ForwardMode::infer());
  const auto yb = b.generator.forward(constant(x), onehot_batch({4}, 6), ForwardMode::infer());
  for (std::size_t i = 0; i < ya->value.size(); ++i) ASSERT_NEAR(ya->value[i], yb->value[i], 1e-5);
}

TEST(Checkpoint, RejectsMismatchAndCorruption) {
  const auto cfg = fixtures::toy_arch();
  StarGanNets a(cfg, 8, 1);
  const auto bytes = encode_checkpoint(snapshot(a, 1, "{}"));
  StarGanNets other(build_with_kernel_delta(cfg, 1), 8, 1);
  EXPECT_THROW(restore(decode_checkpoint(bytes), other), Error);
  StarGanNets wider(cfg, 9, 1);
  EXPECT_THROW(restore(decode_checkpoint(bytes), wider), Error);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() / 2)), Error);
  EXPECT_THROW(decode_checkpoint("XXXX" + bytes.substr(4)), Error);
}
