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

// Race harness for hot model swaps. Every version v is a constant network
// whose output probability encodes v, so each DetectionRecord can be checked
// for a prob/version mismatch. Swaps stage each model through a poisoned
// state first; a reader that ever sees the poison value observed a
// half-built model.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "sajd/detector.hpp"
#include "sajd/telemetry_store.hpp"

namespace race {

inline constexpr double kPoisonProb = 0.987654321;

inline double prob_for_version(std::int64_t v) { return 0.05 + 0.9 * static_cast<double>(v % 997) / 997.0; }

inline sajd::MlpModel constant_model(double prob) {
  auto m = sajd::zero_model();
  m.layers.back().biases[0] = std::log(prob / (1.0 - prob));
  return m;
}

struct Result {
  std::int64_t samples = 0;
  std::int64_t detections = 0;
  std::int64_t swaps = 0;
  std::int64_t version_regressions = 0;
  std::int64_t mismatches = 0;
  std::int64_t poison_seen = 0;
  std::int64_t seq_gaps = 0;
};

// Replays `n` samples through the detector while a second thread performs
// `swaps` hot swaps spread across the run.
inline Result run(std::int64_t n, std::int64_t swaps) {
  sajd::Detector det;
  {
    auto m = constant_model(prob_for_version(1));
    m.version = 1;
    det.swap_model(std::move(m));
  }
  sajd::TelemetryStore store;
  std::atomic<std::int64_t> progress{0};
  std::atomic<std::int64_t> done_swaps{0};

  std::thread swapper([&] {
    for (std::int64_t v = 2; v < swaps + 2; ++v) {
      // Wait until the reader is past this swap's share of the stream.
      const std::int64_t at = (v - 1) * n / (swaps + 2);
      while (progress.load(std::memory_order_acquire) < at) std::this_thread::yield();
      auto staged = std::make_shared<sajd::MlpModel>(constant_model(kPoisonProb));
      staged->version = v;
      staged->layers.back().biases[0] = constant_model(prob_for_version(v)).layers.back().biases[0];
      det.swap_model(std::shared_ptr<const sajd::MlpModel>(std::move(staged)));
      done_swaps.fetch_add(1, std::memory_order_release);
    }
  });

  Result r;
  for (std::int64_t s = 0; s < n; ++s) {
    const sajd::KpiObservation obs{s, s * 100, 20.0, 14, 0.01};
    store.append(det.infer(obs));
    progress.store(s + 1, std::memory_order_release);
    ++r.samples;
  }
  swapper.join();
  r.swaps = done_swaps.load();

  const auto dets = store.detections().all();
  r.detections = static_cast<std::int64_t>(dets.size());
  std::int64_t prev_version = 0;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const auto& d = dets[i];
    if (d.seq != static_cast<std::int64_t>(i)) ++r.seq_gaps;
    if (d.model_version < prev_version) ++r.version_regressions;
    prev_version = d.model_version;
    if (std::abs(d.prob - kPoisonProb) < 1e-9) ++r.poison_seen;
    if (std::abs(d.prob - prob_for_version(d.model_version)) > 1e-9) ++r.mismatches;
  }
  return r;
}

}  // namespace race
