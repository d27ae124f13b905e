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

// Independent reference computations used by the tests. Nothing here calls
// into the library; each oracle is written from the defining formula.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

// Interference and noise summed as linear powers; noise amplitude -> power
// via 20 log10.
inline double sinr_db(double signal_db, double interference_db, double noise_amplitude) {
  const double noise_w = noise_amplitude * noise_amplitude;
  const double int_w = std::pow(10.0, interference_db / 10.0);
  return signal_db - 10.0 * std::log10(noise_w + int_w);
}

inline double logistic_bler(double snr, double thr, double k) { return 1.0 / (1.0 + std::exp(k * (snr - thr))); }

struct P2 {
  double x, y;
};

// Minimum within-cluster sum of squares over every 2-partition with both
// sides non-empty (point 0 pinned to side 0 to skip mirror images).
inline double brute_force_two_means(const std::vector<P2>& pts) {
  const std::size_t n = pts.size();
  double best = std::numeric_limits<double>::infinity();
  if (n < 2) return 0.0;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    double sx[2] = {0, 0}, sy[2] = {0, 0};
    int cnt[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      const int c = i == 0 ? 0 : static_cast<int>((mask >> (i - 1)) & 1);
      sx[c] += pts[i].x;
      sy[c] += pts[i].y;
      ++cnt[c];
    }
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = i == 0 ? 0 : static_cast<int>((mask >> (i - 1)) & 1);
      const double dx = pts[i].x - sx[c] / cnt[c], dy = pts[i].y - sy[c] / cnt[c];
      w += dx * dx + dy * dy;
    }
    best = std::min(best, w);
  }
  return best;
}

// Central difference of f at parameter *p.
inline double central_diff(const std::function<double()>& f, double* p, double h) {
  const double saved = *p;
  *p = saved + h;
  const double up = f();
  *p = saved - h;
  const double down = f();
  *p = saved;
  return (up - down) / (2.0 * h);
}

// z-score standardization with unit scale for a constant column, applied
// to (x, y) pairs independently per column.
inline std::vector<P2> standardize(std::vector<P2> pts) {
  double mx = 0, my = 0;
  for (auto& p : pts) mx += p.x, my += p.y;
  mx /= pts.size();
  my /= pts.size();
  double vx = 0, vy = 0;
  for (auto& p : pts) vx += (p.x - mx) * (p.x - mx), vy += (p.y - my) * (p.y - my);
  double sx = std::sqrt(vx / pts.size()), sy = std::sqrt(vy / pts.size());
  if (sx == 0) sx = 1;
  if (sy == 0) sy = 1;
  for (auto& p : pts) p = {(p.x - mx) / sx, (p.y - my) / sy};
  return pts;
}

}  // namespace oracle
