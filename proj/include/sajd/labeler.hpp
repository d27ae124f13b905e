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

#include <array>
#include <cstdint>
#include <functional>
#include <queue>
#include <span>
#include <vector>

#include "sajd/kernels.hpp"
#include "sajd/types.hpp"

namespace sajd {

class TelemetryStore;

struct LabelerConfig {
  int window_size = 100;
  double separation_min_db = 4.0;
  int smoothing_halfwidth = 2;
  double baseline_quantile = 0.5;
  double baseline_offset_db = 6.0;
  /// Windows held back at cold start before giving up and labeling CLEAN.
  int max_deferred_windows = 50;
  /// Largest window solved by the exact 2-means search; bigger ones use Lloyd only.
  std::size_t exact_search_limit = 512;

  void validate() const;
};

/// Running quantile of SNRs the labeler has called CLEAN. Exact lower
/// nearest-rank quantile, kept with two heaps.
class BaselineState {
 public:
  explicit BaselineState(double quantile = 0.5);

  void add(double clean_snr_db);
  /// The configured quantile (the median by default). NaN while empty.
  double clean_snr_median_db() const;
  std::int64_t sample_count() const { return count_; }
  double quantile() const { return q_; }

 private:
  double q_;
  std::int64_t count_ = 0;
  std::priority_queue<double> lower_;
  std::priority_queue<double, std::vector<double>, std::greater<double>> upper_;
};

struct TwoMeansResult {
  std::vector<std::uint8_t> assignment;
  std::array<kernels::Point2, 2> centroids{};
  double wcss = 0.0;
  int lloyd_iterations = 0;
  bool exact_improved = false;
};

/// Deterministic 2-means: Lloyd seeded at the min-x and max-x points, then
/// replaced by the exact optimum when one with lower WCSS exists and the
/// input has at most `exact_limit` points.
TwoMeansResult two_means(std::span<const kernels::Point2> pts, std::size_t exact_limit);

enum class LabelPath { Clustered, Baseline, Deferred };

struct WindowResult {
  std::vector<LabelRecord> labels;
  BaselineState baseline;
  LabelPath path = LabelPath::Clustered;
  /// |mean SNR difference| between the two clusters, dB.
  double separation_db = 0.0;
};

/// Labels one window. Returns path == Deferred (and no labels) when the
/// window is homogeneous and no clean baseline exists yet. Throws
/// ValidationError for an empty or unordered window.
WindowResult label_window(std::span<const KpiObservation> samples, const BaselineState& baseline,
                          const LabelerConfig& cfg);

/// In-place variant used by the runner; avoids copying the baseline heaps.
LabelPath label_window_into(std::span<const KpiObservation> samples, BaselineState& baseline,
                            const LabelerConfig& cfg, std::vector<LabelRecord>& out,
                            double* separation_db = nullptr);

/// Streaming front end: buffers observations into non-overlapping windows,
/// handles cold-start deferral, and emits labels in seq order.
class LabelerRunner {
 public:
  explicit LabelerRunner(LabelerConfig cfg);

  /// Returns the labels completed by this observation (often none).
  std::vector<LabelRecord> push(const KpiObservation& obs);
  /// Labels everything still buffered, including a partial window.
  std::vector<LabelRecord> flush();

  const BaselineState& baseline() const { return baseline_; }
  const LabelerConfig& config() const { return cfg_; }
  std::size_t pending() const { return deferred_.size() + window_.size(); }

 private:
  std::vector<LabelRecord> close_window(bool final);
  void force_clean(std::vector<LabelRecord>& out);

  LabelerConfig cfg_;
  BaselineState baseline_;
  std::vector<KpiObservation> deferred_;
  int deferred_windows_ = 0;
  std::vector<KpiObservation> window_;
};

/// Labels the whole `kpi` stream in windows and appends to `labels`. Labels
/// are computed before the first append, so a rerun fails on the first
/// duplicate seq (RejectedRecord) and leaves the store unchanged.
std::size_t run_labeler(TelemetryStore& store, const LabelerConfig& cfg);

}  // namespace sajd
