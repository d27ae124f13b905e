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

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "sajd/error.hpp"
#include "sajd/mlp.hpp"
#include "sajd/types.hpp"

namespace sajd {

class TelemetryStore;

class NoModelDeployed : public Error {
 public:
  using Error::Error;
};

class StaleModelVersion : public Error {
 public:
  using Error::Error;
};

class BackpressureError : public Error {
 public:
  using Error::Error;
};

/// Immutable pairing of a model with the version it was deployed under.
struct Deployment {
  std::shared_ptr<const MlpModel> model;
  std::int64_t version = 0;
};

struct SwapReceipt {
  std::int64_t old_version = 0;
  std::int64_t new_version = 0;
  /// First seq guaranteed to be served by the new model.
  std::int64_t seq_boundary = 0;
};

/// Snapshot of the deployed model slot.
struct DeployedModelSlot {
  std::shared_ptr<const MlpModel> current;
  std::int64_t version = 0;
  std::int64_t swapped_at_seq = 0;
};

/// Near-real-time detector. Inference reads the deployed model through one
/// atomic shared_ptr load; swaps publish a fully built immutable model with a
/// compare-and-swap, so readers never see a partial model and never block.
class Detector {
 public:
  Detector() = default;
  Detector(const Detector&) = delete;
  Detector& operator=(const Detector&) = delete;

  bool has_model() const;
  DeployedModelSlot slot() const;

  /// Throws NoModelDeployed before the first swap.
  DetectionRecord infer(const KpiObservation& sample);

  /// Installs `model` under model.version. Throws StaleModelVersion when the
  /// version does not exceed the deployed one; the slot is left untouched.
  SwapReceipt swap_model(MlpModel model);
  SwapReceipt swap_model(std::shared_ptr<const MlpModel> model);

  std::vector<SwapReceipt> receipts() const;

 private:
  std::shared_ptr<const Deployment> deployment_;
  std::atomic<std::int64_t> started_seq_{-1};
  mutable std::mutex receipts_mu_;
  std::vector<SwapReceipt> receipts_;
};

/// Pull-based sample source for run_detector. Returns nullopt once closed.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual std::optional<KpiObservation> next() = 0;
};

/// Replays an in-memory trace.
class VectorSource : public SampleSource {
 public:
  explicit VectorSource(std::vector<KpiObservation> samples) : samples_(std::move(samples)) {}
  std::optional<KpiObservation> next() override;

 private:
  std::vector<KpiObservation> samples_;
  std::size_t pos_ = 0;
};

/// Producer/consumer hand-off between a live source and the detector. A push
/// that would leave the consumer more than `max_lag` samples behind aborts the
/// queue; the consumer then raises BackpressureError instead of dropping data.
class SampleQueue : public SampleSource {
 public:
  explicit SampleQueue(std::size_t max_lag = 1000) : max_lag_(max_lag) {}

  /// Throws BackpressureError when the lag bound is exceeded.
  void push(const KpiObservation& s);
  void close();
  std::optional<KpiObservation> next() override;

 private:
  std::size_t max_lag_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<KpiObservation> q_;
  bool closed_ = false;
  std::string abort_reason_;
};

struct DetectorSummary {
  std::int64_t detections = 0;
  std::int64_t first_seq = -1;
  std::int64_t last_seq = -1;
  std::int64_t max_latency_us = 0;
  /// Samples whose processing exceeded the per-sample budget.
  std::int64_t budget_overruns = 0;
  std::vector<std::int64_t> versions_seen;
  bool aborted = false;
  std::string abort_reason;
};

inline constexpr std::int64_t kLatencyBudgetUs = 10'000;

/// Consumes `source` in order, appending one DetectionRecord per sample to
/// the store's `detections` stream. Store or source failures abort the run
/// and are reported in the summary.
DetectorSummary run_detector(Detector& detector, SampleSource& source, TelemetryStore& store);

}  // namespace sajd
