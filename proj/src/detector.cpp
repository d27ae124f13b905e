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
#include "sajd/detector.hpp"

#include <chrono>

#include "sajd/telemetry_store.hpp"

namespace sajd {

bool Detector::has_model() const { return std::atomic_load(&deployment_) != nullptr; }

DeployedModelSlot Detector::slot() const {
  auto d = std::atomic_load(&deployment_);
  if (!d) return {};
  std::lock_guard lock(receipts_mu_);
  std::int64_t at = 0;
  for (const auto& r : receipts_) {
    if (r.new_version == d->version) at = r.seq_boundary;
  }
  return {d->model, d->version, at};
}

DetectionRecord Detector::infer(const KpiObservation& sample) {
  const auto t0 = std::chrono::steady_clock::now();
  // Announce the seq before reading the slot; swap_model reads this after
  // publishing to compute its boundary.
  started_seq_.store(sample.seq, std::memory_order_seq_cst);
  const auto d = std::atomic_load_explicit(&deployment_, std::memory_order_seq_cst);
  if (!d) throw NoModelDeployed("infer called before any model was deployed");

  DetectionRecord r;
  r.seq = sample.seq;
  r.prob = forward(*d->model, features_of(sample));
  r.verdict = verdict_for(*d->model, r.prob);
  r.model_version = d->version;
  const auto t1 = std::chrono::steady_clock::now();
  r.latency_us = std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count();
  return r;
}

SwapReceipt Detector::swap_model(MlpModel model) {
  return swap_model(std::make_shared<const MlpModel>(std::move(model)));
}

SwapReceipt Detector::swap_model(std::shared_ptr<const MlpModel> model) {
  if (!model) throw ValidationError("swap_model: null model");
  model->validate();
  auto next = std::make_shared<const Deployment>(Deployment{model, model->version});

  auto current = std::atomic_load_explicit(&deployment_, std::memory_order_seq_cst);
  while (true) {
    const std::int64_t old_version = current ? current->version : 0;
    if (next->version <= old_version) {
      throw StaleModelVersion("model version " + std::to_string(next->version) +
                              " does not exceed deployed version " + std::to_string(old_version));
    }
    if (std::atomic_compare_exchange_strong_explicit(&deployment_, &current, next,
                                                     std::memory_order_seq_cst,
                                                     std::memory_order_seq_cst)) {
      SwapReceipt receipt{old_version, next->version,
                          started_seq_.load(std::memory_order_seq_cst) + 1};
      std::lock_guard lock(receipts_mu_);
      receipts_.push_back(receipt);
      return receipt;
    }
  }
}

std::vector<SwapReceipt> Detector::receipts() const {
  std::lock_guard lock(receipts_mu_);
  return receipts_;
}

std::optional<KpiObservation> VectorSource::next() {
  if (pos_ >= samples_.size()) return std::nullopt;
  return samples_[pos_++];
}

void SampleQueue::push(const KpiObservation& s) {
  std::lock_guard lock(mu_);
  if (!abort_reason_.empty()) throw BackpressureError(abort_reason_);
  if (closed_) throw Error("push on a closed sample queue");
  if (q_.size() >= max_lag_) {
    abort_reason_ = "detector lags the source by more than " + std::to_string(max_lag_) +
                    " samples at seq " + std::to_string(s.seq);
    closed_ = true;
    cv_.notify_all();
    throw BackpressureError(abort_reason_);
  }
  q_.push_back(s);
  cv_.notify_one();
}

void SampleQueue::close() {
  std::lock_guard lock(mu_);
  closed_ = true;
  cv_.notify_all();
}

std::optional<KpiObservation> SampleQueue::next() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return !q_.empty() || closed_; });
  if (!abort_reason_.empty()) throw BackpressureError(abort_reason_);
  if (q_.empty()) return std::nullopt;
  auto s = q_.front();
  q_.pop_front();
  return s;
}

DetectorSummary run_detector(Detector& detector, SampleSource& source, TelemetryStore& store) {
  if (!detector.has_model()) throw NoModelDeployed("run_detector needs an initial model");
  DetectorSummary summary;
  try {
    while (auto s = source.next()) {
      const auto t0 = std::chrono::steady_clock::now();
      auto rec = detector.infer(*s);
      store.append(rec);
      const auto us = std::chrono::duration_cast<std::chrono::microseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      if (summary.first_seq < 0) summary.first_seq = rec.seq;
      summary.last_seq = rec.seq;
      ++summary.detections;
      summary.max_latency_us = std::max(summary.max_latency_us, us);
      if (us > kLatencyBudgetUs) ++summary.budget_overruns;
      if (summary.versions_seen.empty() || summary.versions_seen.back() != rec.model_version) {
        summary.versions_seen.push_back(rec.model_version);
      }
    }
  } catch (const std::exception& e) {
    summary.aborted = true;
    summary.abort_reason = e.what();
  }
  return summary;
}

}  // namespace sajd
