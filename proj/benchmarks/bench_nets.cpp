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

#include <benchmark/benchmark.h>

#include <random>

#include "dogvc/nets/networks.hpp"
#include "dogvc/train.hpp"

using namespace dogvc;

namespace {

nets::NetworkConfig arch() { return nets::load_architecture(DOGVC_BENCH_ARCH); }

nets::Tensor input(int n, int f, int t) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  nets::Tensor x(n, f, t);
  for (auto& v : x.data()) v = g(rng);
  return x;
}

void BM_GeneratorForward(benchmark::State& state) {
  const auto cfg = arch();
  nets::StarGanNets sg(cfg, 80, 1);
  const auto x = input(1, 80, static_cast<int>(state.range(0)));
  const auto c = nets::onehot_batch({1}, cfg.num_domains);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sg.generator.forward(nets::constant(x), c, nets::ForwardMode::infer()));
  }
}
BENCHMARK(BM_GeneratorForward)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_StarGanGeneratorStep(benchmark::State& state) {
  const auto cfg = arch();
  nets::StarGanNets sg(cfg, 80, 1);
  const train::Batch b{input(4, 80, 128), {0, 1, 2, 3}};
  train::Adam opt(sg.generator_parameters(), 1e-4);
  for (auto _ : state) {
    opt.zero_grad();
    const auto r = train::stargan_generator_loss(b, {1, 2, 3, 0}, sg, {}, nets::ForwardMode::train());
    nets::backward(r.total);
    opt.step(10.0);
  }
}
BENCHMARK(BM_StarGanGeneratorStep)->Unit(benchmark::kMillisecond);

void BM_AcvaeStep(benchmark::State& state) {
  const auto cfg = arch();
  nets::AcvaeNets av(cfg, 80, 1);
  const train::Batch b{input(4, 80, 128), {0, 1, 2, 3}};
  const auto eps = input(4, cfg.latent_dim, 128 / 4);
  train::Adam opt(av.vae_parameters(), 1e-4);
  for (auto _ : state) {
    opt.zero_grad();
    const auto r = train::acvae_loss(b, av, {}, eps, {1, 2, 3, 0}, nets::ForwardMode::train());
    nets::backward(r.total);
    opt.step(10.0);
  }
}
BENCHMARK(BM_AcvaeStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
