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
#include <doctest.h>

#include <omp.h>

#include <random>

#include "oracles.hpp"
#include "sajd/kernels.hpp"

using namespace sajd;

namespace {

std::vector<Example> batch(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> snr(-10.0, 40.0), u(0.0, 1.0);
  std::vector<Example> out(n);
  for (auto& e : out) e = {{snr(rng), u(rng), std::floor(u(rng) * 29)}, u(rng) < 0.4, 1.0 + u(rng)};
  return out;
}

}  // namespace

TEST_CASE("parallel predict equals serial predict") {
  const auto m = init_model(2);
  std::vector<Features> xs;
  for (const auto& e : batch(3000, 1)) xs.push_back(e.x);
  CHECK(kernels::parallel::predict(m, xs) == kernels::serial::predict(m, xs));
}

TEST_CASE("chunked gradient reduction is independent of thread count") {
  const auto m = init_model(3);
  const auto data = batch(1000, 2);
  auto g1 = Gradients::zeros_like(m), g4 = Gradients::zeros_like(m), gs = Gradients::zeros_like(m);
  omp_set_num_threads(1);
  const double l1 = kernels::parallel::loss_grad_sum(m, data, g1);
  omp_set_num_threads(4);
  const double l4 = kernels::parallel::loss_grad_sum(m, data, g4);
  const double ls = kernels::serial::loss_grad_sum(m, data, gs);
  CHECK(l1 == l4);
  CHECK(g1.weights == g4.weights);
  CHECK(g1.biases == g4.biases);
  // Serial sums in index order, so it agrees to rounding only.
  CHECK(ls == doctest::Approx(l1).epsilon(1e-12));
  for (std::size_t l = 0; l < gs.weights.size(); ++l)
    for (std::size_t i = 0; i < gs.weights[l].size(); ++i)
      CHECK(gs.weights[l][i] == doctest::Approx(g1.weights[l][i]).epsilon(1e-9));
}

TEST_CASE("exact 2-means: serial, parallel and brute force agree") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 11;
    std::vector<kernels::Point2> pts;
    std::vector<oracle::P2> ref;
    for (int i = 0; i < n; ++i) {
      const double x = d(rng) + (i % 3 == 0 ? 2.5 : 0.0), y = d(rng);
      pts.push_back({x, y});
      ref.push_back({x, y});
    }
    const auto s = kernels::serial::exact_two_means(pts);
    const auto p = kernels::parallel::exact_two_means(pts);
    const double best = oracle::brute_force_two_means(ref);
    CHECK(s.wcss == doctest::Approx(best).epsilon(1e-9));
    CHECK(p.wcss == doctest::Approx(best).epsilon(1e-9));
    CHECK(p.assignment == s.assignment);
  }
}

TEST_CASE("exact 2-means degenerate inputs") {
  std::vector<kernels::Point2> same(5, {1.0, 2.0});
  CHECK_FALSE(kernels::serial::exact_two_means(same).split);
  std::vector<kernels::Point2> collinear{{0, 0}, {1, 0}, {2, 0}, {10, 0}, {11, 0}};
  const auto r = kernels::parallel::exact_two_means(collinear);
  CHECK(r.split);
  CHECK(r.assignment[0] == r.assignment[2]);
  CHECK(r.assignment[3] == r.assignment[4]);
  CHECK(r.assignment[0] != r.assignment[3]);
}
