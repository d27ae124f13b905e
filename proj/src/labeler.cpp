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
#include "sajd/labeler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sajd/error.hpp"
#include "sajd/telemetry_store.hpp"

namespace sajd {

namespace {

constexpr double kMinConfidence = 1e-6;
constexpr int kMaxLloydIterations = 100;

double median_of(std::vector<double> v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double hi = v[mid];
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double sq_dist(const kernels::Point2& a, const kernels::Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::array<kernels::Point2, 2> centroids_of(std::span<const kernels::Point2> pts,
                                            std::span<const std::uint8_t> assignment,
                                            std::array<kernels::Point2, 2> fallback) {
  double sx[2] = {0, 0}, sy[2] = {0, 0}, n[2] = {0, 0};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int c = assignment[i];
    sx[c] += pts[i].x;
    sy[c] += pts[i].y;
    n[c] += 1.0;
  }
  for (int c = 0; c < 2; ++c) {
    if (n[c] > 0) fallback[static_cast<std::size_t>(c)] = {sx[c] / n[c], sy[c] / n[c]};
  }
  return fallback;
}

// Binary median filter; ties keep the original label.
std::vector<std::uint8_t> smooth(const std::vector<std::uint8_t>& in, int halfwidth) {
  if (halfwidth <= 0) return in;
  const auto n = static_cast<std::ptrdiff_t>(in.size());
  std::vector<std::uint8_t> out(in.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto lo = std::max<std::ptrdiff_t>(0, i - halfwidth);
    const auto hi = std::min<std::ptrdiff_t>(n - 1, i + halfwidth);
    int ones = 0;
    for (auto k = lo; k <= hi; ++k) ones += in[static_cast<std::size_t>(k)];
    const int size = static_cast<int>(hi - lo + 1);
    const auto ui = static_cast<std::size_t>(i);
    out[ui] = 2 * ones > size ? 1 : (2 * ones < size ? 0 : in[ui]);
  }
  return out;
}

}  // namespace

void LabelerConfig::validate() const {
  if (window_size < 4) throw ValidationError("labeler window_size must be >= 4");
  if (smoothing_halfwidth < 0) throw ValidationError("labeler smoothing_halfwidth must be >= 0");
  if (!(baseline_quantile > 0.0 && baseline_quantile < 1.0)) {
    throw ValidationError("labeler baseline_quantile must lie in (0,1)");
  }
  if (!(baseline_offset_db > 0.0)) throw ValidationError("labeler baseline_offset_db must be > 0");
  if (!(separation_min_db >= 0.0)) throw ValidationError("labeler separation_min_db must be >= 0");
  if (max_deferred_windows < 0) throw ValidationError("labeler max_deferred_windows must be >= 0");
}

BaselineState::BaselineState(double quantile) : q_(quantile) {}

void BaselineState::add(double x) {
  if (lower_.empty() || x <= lower_.top()) {
    lower_.push(x);
  } else {
    upper_.push(x);
  }
  ++count_;
  const auto target = static_cast<std::size_t>(
      std::max<double>(1.0, std::ceil(q_ * static_cast<double>(count_))));
  while (lower_.size() > target) {
    upper_.push(lower_.top());
    lower_.pop();
  }
  while (lower_.size() < target && !upper_.empty()) {
    lower_.push(upper_.top());
    upper_.pop();
  }
}

double BaselineState::clean_snr_median_db() const {
  return lower_.empty() ? std::numeric_limits<double>::quiet_NaN() : lower_.top();
}

TwoMeansResult two_means(std::span<const kernels::Point2> pts, std::size_t exact_limit) {
  TwoMeansResult r;
  r.assignment.assign(pts.size(), 0);
  if (pts.empty()) return r;

  std::size_t lo = 0;
  std::size_t hi = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].x < pts[lo].x) lo = i;
    if (pts[i].x > pts[hi].x) hi = i;
  }
  r.centroids = {pts[lo], pts[hi]};

  for (int it = 0; it < kMaxLloydIterations; ++it) {
    bool changed = it == 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::uint8_t c =
          sq_dist(pts[i], r.centroids[1]) < sq_dist(pts[i], r.centroids[0]) ? 1 : 0;
      if (c != r.assignment[i]) {
        r.assignment[i] = c;
        changed = true;
      }
    }
    r.lloyd_iterations = it + 1;
    if (!changed) break;
    r.centroids = centroids_of(pts, r.assignment, r.centroids);
  }
  r.wcss = kernels::wcss(pts, r.assignment);

  if (pts.size() <= exact_limit) {
    auto exact = kernels::parallel::exact_two_means(pts);
    if (exact.split && exact.wcss < r.wcss - 1e-12 * std::max(1.0, r.wcss)) {
      r.assignment = std::move(exact.assignment);
      r.wcss = exact.wcss;
      r.centroids = centroids_of(pts, r.assignment, r.centroids);
      r.exact_improved = true;
    }
  }
  return r;
}

LabelPath label_window_into(std::span<const KpiObservation> samples, BaselineState& baseline,
                            const LabelerConfig& cfg, std::vector<LabelRecord>& out,
                            double* separation_db) {
  if (samples.empty()) throw ValidationError("label_window: empty window");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].seq <= samples[i - 1].seq) {
      throw ValidationError("label_window: samples must be ordered by seq");
    }
  }
  const std::size_t n = samples.size();

  // Standardize (snr, bler) within the window; flat dimensions keep unit scale.
  double mean[2] = {0, 0};
  for (const auto& s : samples) {
    mean[0] += s.snr_db;
    mean[1] += s.bler;
  }
  mean[0] /= static_cast<double>(n);
  mean[1] /= static_cast<double>(n);
  double var[2] = {0, 0};
  for (const auto& s : samples) {
    var[0] += (s.snr_db - mean[0]) * (s.snr_db - mean[0]);
    var[1] += (s.bler - mean[1]) * (s.bler - mean[1]);
  }
  double scale[2];
  for (int d = 0; d < 2; ++d) {
    const double sd = std::sqrt(var[d] / static_cast<double>(n));
    scale[d] = sd > 0.0 ? sd : 1.0;
  }
  std::vector<kernels::Point2> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = {(samples[i].snr_db - mean[0]) / scale[0], (samples[i].bler - mean[1]) / scale[1]};
  }

  const auto km = two_means(pts, cfg.exact_search_limit);

  double snr_sum[2] = {0, 0}, bler_sum[2] = {0, 0}, cnt[2] = {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const int c = km.assignment[i];
    snr_sum[c] += samples[i].snr_db;
    bler_sum[c] += samples[i].bler;
    cnt[c] += 1.0;
  }
  const bool both = cnt[0] > 0 && cnt[1] > 0;
  const double sep = both ? std::abs(snr_sum[0] / cnt[0] - snr_sum[1] / cnt[1]) : 0.0;
  if (separation_db) *separation_db = sep;

  std::vector<std::uint8_t> raw(n, 0);  // 1 = INTERFERENCE
  std::vector<double> confidence(n, 1.0);
  LabelPath path;

  if (both && sep >= cfg.separation_min_db) {
    path = LabelPath::Clustered;
    const double snr0 = snr_sum[0] / cnt[0];
    const double snr1 = snr_sum[1] / cnt[1];
    int jam;
    if (snr0 != snr1) {
      jam = snr0 < snr1 ? 0 : 1;
    } else {
      jam = bler_sum[0] / cnt[0] >= bler_sum[1] / cnt[1] ? 0 : 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
      raw[i] = km.assignment[i] == jam ? 1 : 0;
      const double d0 = std::sqrt(sq_dist(pts[i], km.centroids[0]));
      const double d1 = std::sqrt(sq_dist(pts[i], km.centroids[1]));
      confidence[i] = d0 + d1 > 0.0 ? std::abs(d0 - d1) / (d0 + d1) : 0.0;
    }
  } else {
    if (baseline.sample_count() == 0) return LabelPath::Deferred;
    path = LabelPath::Baseline;
    std::vector<double> snrs(n);
    for (std::size_t i = 0; i < n; ++i) snrs[i] = samples[i].snr_db;
    const double med = median_of(std::move(snrs));
    const double cut = baseline.clean_snr_median_db() - cfg.baseline_offset_db;
    const std::uint8_t verdict = med < cut ? 1 : 0;
    const double conf = std::min(1.0, std::abs(med - cut) / cfg.baseline_offset_db);
    std::fill(raw.begin(), raw.end(), verdict);
    std::fill(confidence.begin(), confidence.end(), conf);
  }

  const auto labels = smooth(raw, cfg.smoothing_halfwidth);
  out.reserve(out.size() + n);
  for (std::size_t i = 0; i < n; ++i) {
    LabelRecord r;
    r.seq = samples[i].seq;
    r.label = labels[i] ? Label::Interference : Label::Clean;
    r.confidence = std::clamp(confidence[i], kMinConfidence, 1.0);
    r.source = LabelSource::Labeler;
    out.push_back(r);
    if (!labels[i]) baseline.add(samples[i].snr_db);
  }
  return path;
}

WindowResult label_window(std::span<const KpiObservation> samples, const BaselineState& baseline,
                          const LabelerConfig& cfg) {
  WindowResult r{{}, baseline, LabelPath::Clustered, 0.0};
  r.path = label_window_into(samples, r.baseline, cfg, r.labels, &r.separation_db);
  return r;
}

LabelerRunner::LabelerRunner(LabelerConfig cfg) : cfg_(cfg), baseline_(cfg.baseline_quantile) {
  cfg_.validate();
  window_.reserve(static_cast<std::size_t>(cfg_.window_size));
}

std::vector<LabelRecord> LabelerRunner::push(const KpiObservation& obs) {
  window_.push_back(obs);
  if (static_cast<int>(window_.size()) < cfg_.window_size) return {};
  return close_window(false);
}

std::vector<LabelRecord> LabelerRunner::flush() {
  if (window_.empty() && deferred_.empty()) return {};
  return close_window(true);
}

void LabelerRunner::force_clean(std::vector<LabelRecord>& out) {
  // No clean reference was ever found: fall back to CLEAN at coin-flip
  // confidence and seed the baseline from these samples.
  for (const auto& s : deferred_) {
    out.push_back({s.seq, Label::Clean, 0.5, LabelSource::Labeler});
    baseline_.add(s.snr_db);
  }
  deferred_.clear();
  deferred_windows_ = 0;
}

std::vector<LabelRecord> LabelerRunner::close_window(bool final) {
  std::vector<LabelRecord> out;
  if (!window_.empty()) {
    deferred_.insert(deferred_.end(), window_.begin(), window_.end());
    ++deferred_windows_;
    window_.clear();
  }
  if (deferred_.empty()) return out;

  const auto path = label_window_into(deferred_, baseline_, cfg_, out);
  if (path != LabelPath::Deferred) {
    deferred_.clear();
    deferred_windows_ = 0;
    return out;
  }
  if (final || deferred_windows_ > cfg_.max_deferred_windows) force_clean(out);
  return out;
}

std::size_t run_labeler(TelemetryStore& store, const LabelerConfig& cfg) {
  const auto samples = store.kpi().all();
  LabelerRunner runner(cfg);
  std::vector<LabelRecord> labels;
  labels.reserve(samples.size());
  for (const auto& s : samples) {
    auto out = runner.push(observe(s));
    labels.insert(labels.end(), out.begin(), out.end());
  }
  auto tail = runner.flush();
  labels.insert(labels.end(), tail.begin(), tail.end());
  for (const auto& l : labels) store.append(l);
  return labels.size();
}

}  // namespace sajd
