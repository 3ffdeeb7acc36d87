/*
 * Copyright 2026 The bnnint Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <cstddef>
#include <random>
#include <vector>

#include "benchmark/benchmark.h"
#include "bnnint/bnn.h"
#include "bnnint/interaction.h"
#include "bnnint/mlp.h"
#include "bnnint/random.h"

namespace bnnint {
namespace {

void BM_HarsanyiTransform(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  Rng rng = MakeRng(7);
  std::normal_distribution<double> normal;
  std::vector<double> v(size_t{1} << n);
  for (double& x : v) x = normal(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(interaction::HarsanyiTransform(v));
  }
}
BENCHMARK(BM_HarsanyiTransform)->DenseRange(8, 16, 2);

void BM_ZetaReconstruct(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  std::vector<double> v(size_t{1} << n, 0.5);
  const auto table = interaction::HarsanyiTransform(v);
  for (auto _ : state) {
    benchmark::DoNotOptimize(interaction::ZetaReconstruct(table));
  }
}
BENCHMARK(BM_ZetaReconstruct)->DenseRange(8, 16, 4);

void BM_Forward(benchmark::State& state) {
  const size_t hidden = static_cast<size_t>(state.range(0));
  const std::vector<size_t> widths = {10, hidden, hidden, 2};
  const auto model = nn::MlpModel::Initialize(widths, 1);
  const Tensor x = Tensor::Vector(std::vector<double>(10, 0.3));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nn::Forward(model, x));
  }
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(128);

void BM_SampleWeights(benchmark::State& state) {
  const std::vector<size_t> widths = {10, 32, 32, 2};
  const auto model = bnn::BnnModel::Initialize(widths, 1);
  uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bnn::SampleWeights(model, ++seed));
  }
}
BENCHMARK(BM_SampleWeights);

}  // namespace
}  // namespace bnnint

BENCHMARK_MAIN();
