/* Copyright 2026 The DAWN Gateway Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "dawn/canonical_input.hpp"
#include "dawn/hashcore.hpp"
#include "dawn/mapping.hpp"
#include "dawn/model.hpp"
#include "dawn/permute.hpp"
#include "dawn/simattack.hpp"
#include "dawn/stats.hpp"

namespace {

dawn::CanonicalInput MakeInput(std::mt19937_64& rng, const std::vector<std::uint32_t>& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  dawn::Bytes bytes(n);
  for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
  return dawn::Canonicalize(dawn::Dtype::kU8, shape, bytes);
}

dawn::ModelKeySet MakeKeys(dawn::MappingConfig mapping) {
  dawn::ModelKeySet keys;
  for (std::size_t i = 0; i < keys.k_w.size(); ++i) keys.k_w[i] = static_cast<std::uint8_t>(i);
  keys.r_w = dawn::WatermarkRatio::Parse("0.00426");
  keys.mapping = mapping;
  return keys;
}

// HMAC split plus threshold test on an identity-mapped 28x28 input.
void BM_Decision(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto keys = MakeKeys({});
  const auto x = MakeInput(rng, {1, 28, 28});
  for (auto _ : state) {
    const auto split = dawn::SplitForInput(keys, x);
    benchmark::DoNotOptimize(dawn::WatermarkDecision(keys, split));
  }
}
BENCHMARK(BM_Decision);

void BM_MaskBin(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const std::uint32_t side = static_cast<std::uint32_t>(state.range(0));
  const auto x = MakeInput(rng, {3, side, side});
  dawn::MappingConfig cfg{dawn::MappingKind::kMaskBin, 2, 4, true};
  for (auto _ : state) benchmark::DoNotOptimize(dawn::MapInput(cfg, x));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * 3 * side * side);
}
BENCHMARK(BM_MaskBin)->Arg(32)->Arg(224);

void BM_Backdoor(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto m = static_cast<std::size_t>(state.range(0));
  std::exponential_distribution<double> exp;
  std::vector<double> raw(m);
  double total = 0.0;
  for (auto& p : raw) total += (p = exp(rng));
  for (auto& p : raw) p /= total;
  const dawn::PredictionVector honest(raw);
  const auto keys = MakeKeys({});
  const auto split = dawn::SplitForInput(keys, MakeInput(rng, {4, 4}));
  const auto k = dawn::DefaultPermutedSlots(m);
  for (auto _ : state) benchmark::DoNotOptimize(dawn::Backdoor(split, honest, k));
}
BENCHMARK(BM_Backdoor)->Arg(10)->Arg(1000);

void BM_LinearPredict(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const std::vector<std::uint32_t> shape{1, 28, 28};
  const auto model = dawn::RandomLinearModel("bench", 10, shape, 1);
  const auto x = MakeInput(rng, shape);
  for (auto _ : state) benchmark::DoNotOptimize(dawn::Predict(model, x));
}
BENCHMARK(BM_LinearPredict);

void BM_TrivialProbExact(benchmark::State& state) {
  const auto e = dawn::ParseRational("1/2");
  const auto size = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dawn::TrivialProb(10, e, size));
}
BENCHMARK(BM_TrivialProbExact)->Arg(109)->Arg(1000);

void BM_TrivialProbFast(benchmark::State& state) {
  const auto e = dawn::ParseRational("1/2");
  const auto size = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dawn::Log10TrivialProbFast(10, e, size));
}
BENCHMARK(BM_TrivialProbFast)->Arg(109)->Arg(1000);

void BM_MinWatermarkSize(benchmark::State& state) {
  const auto e = dawn::ParseRational("1/2");
  const dawn::Rational target = dawn::PowerOfTwo(-64) / dawn::Rational(1000000);
  const auto m = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dawn::MinWatermarkSize(m, e, target));
}
BENCHMARK(BM_MinWatermarkSize)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
