// Copyright 2026 The SAJD Authors
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
// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS set to the
// thread count of interest; on a single core the two paths should tie.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "sajd/kernels.hpp"
#include "sajd/mlp.hpp"

namespace {

using namespace sajd;

std::vector<Example> make_examples(std::size_t n) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> snr(15.0, 8.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Example> out(n);
  for (auto& e : out) {
    e.x = {snr(rng), u(rng), static_cast<double>(static_cast<int>(u(rng) * 28))};
    e.y = e.x.snr_db < 12.0 ? 1 : 0;
  }
  return out;
}

std::vector<kernels::Point2> make_points(std::size_t n) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<kernels::Point2> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = {d(rng) + (i % 2 ? 3.0 : 0.0), d(rng)};
  return pts;
}

template <bool Parallel>
void BM_LossGrad(benchmark::State& state) {
  const auto model = init_model(3);
  const auto data = make_examples(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto grad = Gradients::zeros_like(model);
    const double loss = Parallel ? kernels::parallel::loss_grad_sum(model, data, grad)
                                 : kernels::serial::loss_grad_sum(model, data, grad);
    benchmark::DoNotOptimize(loss);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Predict(benchmark::State& state) {
  const auto model = init_model(3);
  std::vector<Features> xs;
  for (const auto& e : make_examples(static_cast<std::size_t>(state.range(0)))) xs.push_back(e.x);
  for (auto _ : state) {
    auto p = Parallel ? kernels::parallel::predict(model, xs) : kernels::serial::predict(model, xs);
    benchmark::DoNotOptimize(p.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_ExactTwoMeans(benchmark::State& state) {
  const auto pts = make_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto s = Parallel ? kernels::parallel::exact_two_means(pts) : kernels::serial::exact_two_means(pts);
    benchmark::DoNotOptimize(s.wcss);
  }
}

}  // namespace

BENCHMARK(BM_LossGrad<false>)->Name("loss_grad/serial")->Arg(1024)->Arg(16384);
BENCHMARK(BM_LossGrad<true>)->Name("loss_grad/omp")->Arg(1024)->Arg(16384);
BENCHMARK(BM_Predict<false>)->Name("predict/serial")->Arg(16384);
BENCHMARK(BM_Predict<true>)->Name("predict/omp")->Arg(16384);
BENCHMARK(BM_ExactTwoMeans<false>)->Name("exact_two_means/serial")->Arg(100)->Arg(512);
BENCHMARK(BM_ExactTwoMeans<true>)->Name("exact_two_means/omp")->Arg(100)->Arg(512);

BENCHMARK_MAIN();
