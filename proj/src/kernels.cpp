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
#include "sajd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sajd::kernels {

namespace {

double act(Activation a, double z) {
  switch (a) {
    case Activation::Relu:
      return z > 0.0 ? z : 0.0;
    case Activation::Sigmoid:
      return sigmoid(z);
    case Activation::Identity:
      return z;
  }
  return z;
}

double act_grad(Activation a, double z, double out) {
  switch (a) {
    case Activation::Relu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::Sigmoid:
      return out * (1.0 - out);
    case Activation::Identity:
      return 1.0;
  }
  return 1.0;
}

// Scratch buffers for one forward/backward pass.
struct Workspace {
  std::vector<std::vector<double>> z;
  std::vector<std::vector<double>> a;  // a[0] is the normalized input
  std::vector<double> delta;
  std::vector<double> delta_prev;

  explicit Workspace(const MlpModel& m) {
    a.emplace_back(kNumFeatures, 0.0);
    for (const auto& l : m.layers) {
      z.emplace_back(static_cast<std::size_t>(l.out), 0.0);
      a.emplace_back(static_cast<std::size_t>(l.out), 0.0);
    }
  }
};

double forward_into(const MlpModel& m, const Features& f, Workspace& ws) {
  const auto x = normalize(m, f);
  std::copy(x.begin(), x.end(), ws.a[0].begin());
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const auto& layer = m.layers[l];
    const auto& in = ws.a[l];
    for (int o = 0; o < layer.out; ++o) {
      const auto uo = static_cast<std::size_t>(o);
      double z = layer.biases[uo];
      const double* w = &layer.weights[uo * static_cast<std::size_t>(layer.in)];
      for (int i = 0; i < layer.in; ++i) z += w[i] * in[static_cast<std::size_t>(i)];
      ws.z[l][uo] = z;
      ws.a[l + 1][uo] = act(layer.activation, z);
    }
  }
  return ws.z.back()[0];
}

// Planar WCSS from sufficient statistics.
double wcss_from_sums(double n, double sx, double sy, double sxx, double syy) {
  if (n <= 0.0) return 0.0;
  return std::max(0.0, (sxx - sx * sx / n) + (syy - sy * sy / n));
}

std::vector<double> critical_directions(std::span<const Point2> pts) {
  std::vector<double> angles;
  const std::size_t n = pts.size();
  angles.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = pts[j].x - pts[i].x;
      const double dy = pts[j].y - pts[i].y;
      if (dx == 0.0 && dy == 0.0) continue;
      // Direction orthogonal to (dx, dy): projections of i and j tie there.
      double t = std::atan2(dx, -dy);
      if (t < 0.0) t += std::numbers::pi;
      if (t >= std::numbers::pi) t -= std::numbers::pi;
      angles.push_back(t);
    }
  }
  std::sort(angles.begin(), angles.end());
  angles.erase(std::unique(angles.begin(), angles.end()), angles.end());

  std::vector<double> dirs;
  if (angles.empty()) return dirs;
  dirs.reserve(angles.size());
  for (std::size_t k = 0; k + 1 < angles.size(); ++k) dirs.push_back(0.5 * (angles[k] + angles[k + 1]));
  dirs.push_back(0.5 * (angles.back() + angles.front() + std::numbers::pi));
  return dirs;
}

struct Candidate {
  double cost = std::numeric_limits<double>::infinity();
  std::size_t dir = 0;
  std::size_t prefix = 0;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  if (a.dir != b.dir) return a.dir < b.dir;
  return a.prefix < b.prefix;
}

std::vector<std::size_t> projection_order(std::span<const Point2> pts, double angle,
                                          std::vector<double>& proj) {
  const double ux = std::cos(angle);
  const double uy = std::sin(angle);
  proj.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) proj[i] = ux * pts[i].x + uy * pts[i].y;
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return proj[a] != proj[b] ? proj[a] < proj[b] : a < b;
  });
  return order;
}

Candidate best_prefix(std::span<const Point2> pts, double angle, std::size_t dir_index) {
  std::vector<double> proj;
  const auto order = projection_order(pts, angle, proj);
  double tx = 0, ty = 0, txx = 0, tyy = 0;
  for (const auto& p : pts) {
    tx += p.x;
    ty += p.y;
    txx += p.x * p.x;
    tyy += p.y * p.y;
  }
  const double n = static_cast<double>(pts.size());
  Candidate best;
  double sx = 0, sy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 1; k < order.size(); ++k) {
    const auto& p = pts[order[k - 1]];
    sx += p.x;
    sy += p.y;
    sxx += p.x * p.x;
    syy += p.y * p.y;
    // Coincident projections cannot be separated by this direction.
    if (proj[order[k - 1]] == proj[order[k]]) continue;
    const double kk = static_cast<double>(k);
    const double cost = wcss_from_sums(kk, sx, sy, sxx, syy) +
                        wcss_from_sums(n - kk, tx - sx, ty - sy, txx - sxx, tyy - syy);
    Candidate c{cost, dir_index, k};
    if (better(c, best)) best = c;
  }
  return best;
}

TwoMeansSplit materialize(std::span<const Point2> pts, const std::vector<double>& dirs,
                          const Candidate& best) {
  TwoMeansSplit out;
  out.assignment.assign(pts.size(), 0);
  if (!std::isfinite(best.cost)) {
    out.wcss = wcss(pts, out.assignment);
    return out;
  }
  std::vector<double> proj;
  const auto order = projection_order(pts, dirs[best.dir], proj);
  for (std::size_t k = best.prefix; k < order.size(); ++k) out.assignment[order[k]] = 1;
  out.split = true;
  out.wcss = wcss(pts, out.assignment);
  return out;
}

}  // namespace

double wcss(std::span<const Point2> pts, std::span<const std::uint8_t> assignment) {
  double cx[2] = {0, 0}, cy[2] = {0, 0}, cnt[2] = {0, 0};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int c = assignment[i] ? 1 : 0;
    cx[c] += pts[i].x;
    cy[c] += pts[i].y;
    cnt[c] += 1.0;
  }
  for (int c = 0; c < 2; ++c) {
    if (cnt[c] > 0) {
      cx[c] /= cnt[c];
      cy[c] /= cnt[c];
    }
  }
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int c = assignment[i] ? 1 : 0;
    const double dx = pts[i].x - cx[c];
    const double dy = pts[i].y - cy[c];
    s += dx * dx + dy * dy;
  }
  return s;
}

double accumulate_range(const MlpModel& m, std::span<const Example> batch, std::size_t begin,
                        std::size_t end, Gradients& grad) {
  Workspace ws(m);
  double loss = 0.0;
  const std::size_t L = m.layers.size();
  for (std::size_t e = begin; e < end; ++e) {
    const auto& ex = batch[e];
    const double z_out = forward_into(m, ex.x, ws);
    loss += ex.weight * bce_from_logit(z_out, ex.y);

    // Output delta for sigmoid + BCE collapses to (p - y).
    ws.delta.assign(1, ex.weight * (sigmoid(z_out) - ex.y));
    for (std::size_t li = L; li-- > 0;) {
      const auto& layer = m.layers[li];
      const auto& in = ws.a[li];
      auto& gw = grad.weights[li];
      auto& gb = grad.biases[li];
      for (int o = 0; o < layer.out; ++o) {
        const auto uo = static_cast<std::size_t>(o);
        const double d = ws.delta[uo];
        gb[uo] += d;
        double* row = &gw[uo * static_cast<std::size_t>(layer.in)];
        for (int i = 0; i < layer.in; ++i) row[i] += d * in[static_cast<std::size_t>(i)];
      }
      if (li == 0) break;
      const auto& below = m.layers[li - 1];
      ws.delta_prev.assign(static_cast<std::size_t>(layer.in), 0.0);
      for (int o = 0; o < layer.out; ++o) {
        const auto uo = static_cast<std::size_t>(o);
        const double* w = &layer.weights[uo * static_cast<std::size_t>(layer.in)];
        for (int i = 0; i < layer.in; ++i) ws.delta_prev[static_cast<std::size_t>(i)] += w[i] * ws.delta[uo];
      }
      for (int i = 0; i < layer.in; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        ws.delta_prev[ui] *= act_grad(below.activation, ws.z[li - 1][ui], ws.a[li][ui]);
      }
      ws.delta.swap(ws.delta_prev);
    }
  }
  return loss;
}

namespace serial {

std::vector<double> predict(const MlpModel& m, std::span<const Features> xs) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = forward(m, xs[i]);
  return out;
}

double loss_grad_sum(const MlpModel& m, std::span<const Example> batch, Gradients& grad) {
  return accumulate_range(m, batch, 0, batch.size(), grad);
}

TwoMeansSplit exact_two_means(std::span<const Point2> pts) {
  if (pts.size() < 2) {
    TwoMeansSplit out;
    out.assignment.assign(pts.size(), 0);
    return out;
  }
  const auto dirs = critical_directions(pts);
  Candidate best;
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    const auto c = best_prefix(pts, dirs[d], d);
    if (better(c, best)) best = c;
  }
  return materialize(pts, dirs, best);
}

}  // namespace serial

namespace parallel {

std::vector<double> predict(const MlpModel& m, std::span<const Features> xs) {
  std::vector<double> out(xs.size());
  const auto n = static_cast<std::ptrdiff_t>(xs.size());
#pragma omp parallel for schedule(static) if (n > 4096)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = forward(m, xs[static_cast<std::size_t>(i)]);
  }
  return out;
}

double loss_grad_sum(const MlpModel& m, std::span<const Example> batch, Gradients& grad) {
  const std::size_t chunks = (batch.size() + kGradChunk - 1) / kGradChunk;
  if (chunks <= 1) return accumulate_range(m, batch, 0, batch.size(), grad);

  std::vector<Gradients> partial(chunks, Gradients::zeros_like(m));
  std::vector<double> losses(chunks, 0.0);
  const auto nchunks = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < nchunks; ++c) {
    const auto uc = static_cast<std::size_t>(c);
    const std::size_t begin = uc * kGradChunk;
    const std::size_t end = std::min(batch.size(), begin + kGradChunk);
    losses[uc] = accumulate_range(m, batch, begin, end, partial[uc]);
  }
  double loss = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    grad.add(partial[c]);
    loss += losses[c];
  }
  return loss;
}

TwoMeansSplit exact_two_means(std::span<const Point2> pts) {
  if (pts.size() < 2) return serial::exact_two_means(pts);
  const auto dirs = critical_directions(pts);
  Candidate best;
  const auto ndirs = static_cast<std::ptrdiff_t>(dirs.size());
#pragma omp parallel if (ndirs > 256)
  {
    Candidate local;
#pragma omp for schedule(dynamic, 64) nowait
    for (std::ptrdiff_t d = 0; d < ndirs; ++d) {
      const auto c = best_prefix(pts, dirs[static_cast<std::size_t>(d)], static_cast<std::size_t>(d));
      if (better(c, local)) local = c;
    }
#pragma omp critical(sajd_two_means_reduce)
    if (better(local, best)) best = local;
  }
  return materialize(pts, dirs, best);
}

}  // namespace parallel

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace sajd::kernels
