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

#include "dogvc/eval.hpp"

using namespace dogvc;

namespace {

std::string random_text(std::size_t n, std::uint64_t seed) {
  // Hiragana block, three bytes per character in UTF-8.
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ch(0x3042, 0x3093);
  std::u32string s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<char32_t>(ch(rng)));
  std::string out;
  for (char32_t c : s) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
  return out;
}

void BM_Cer(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ref = random_text(n, 1), hyp = random_text(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(eval::cer(ref, hyp));
}
BENCHMARK(BM_Cer)->Arg(20)->Arg(200)->Arg(2000);

void BM_AggregateMos(benchmark::State& state) {
  std::vector<eval::RatingRecord> ratings;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> score(1, 5), cond(0, 7);
  for (int i = 0; i < state.range(0); ++i) {
    ratings.push_back({"r" + std::to_string(i % 30), "c" + std::to_string(cond(rng)),
                       eval::kAllScales[static_cast<std::size_t>(i % 3)], score(rng), 0});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval::aggregate_mos(ratings, [](const eval::RatingRecord& r) { return r.clip; }));
  }
}
BENCHMARK(BM_AggregateMos)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
