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
#pragma once

// Data-parallel kernels. Every kernel has a plain serial reference in
// `kernels::serial` and an OpenMP version in `kernels::parallel`; the tests
// hold the two against each other and the benchmark times them.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sajd/mlp.hpp"

namespace sajd::kernels {

/// Fixed reduction chunk for gradient accumulation. The parallel result only
/// depends on this constant, never on the thread count.
inline constexpr std::size_t kGradChunk = 64;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct TwoMeansSplit {
  /// 0/1 cluster id per point.
  std::vector<std::uint8_t> assignment;
  double wcss = 0.0;
  /// False when every point coincides and no split exists.
  bool split = false;
};

/// Within-cluster sum of squares of a 2-partition, two-pass.
double wcss(std::span<const Point2> pts, std::span<const std::uint8_t> assignment);

/// Accumulates the per-example forward/backward pass over [begin, end) into
/// `grad` and returns the weighted loss sum. Shared by both paths.
double accumulate_range(const MlpModel& m, std::span<const Example> batch, std::size_t begin,
                        std::size_t end, Gradients& grad);

namespace serial {

std::vector<double> predict(const MlpModel& m, std::span<const Features> xs);

/// Weighted loss sum and gradient sum, accumulated in index order.
double loss_grad_sum(const MlpModel& m, std::span<const Example> batch, Gradients& grad);

/// Globally optimal 2-means partition of planar points. Sweeps every
/// projection direction between consecutive critical angles; the optimal
/// partition is always a prefix of one of those orders.
TwoMeansSplit exact_two_means(std::span<const Point2> pts);

}  // namespace serial

namespace parallel {

std::vector<double> predict(const MlpModel& m, std::span<const Features> xs);

/// Chunked in kGradChunk blocks; partials are summed in chunk order.
double loss_grad_sum(const MlpModel& m, std::span<const Example> batch, Gradients& grad);

TwoMeansSplit exact_two_means(std::span<const Point2> pts);

}  // namespace parallel

int max_threads();

}  // namespace sajd::kernels
