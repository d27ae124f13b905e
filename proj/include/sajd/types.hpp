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

#include <cstdint>
#include <optional>
#include <string_view>

namespace sajd {

/// One uplink KPI measurement. `truth_interference` is simulator ground truth
/// and only ever read by evaluation code.
struct KpiSample {
  std::int64_t seq = 0;
  std::int64_t ts_ms = 0;
  double snr_db = 0.0;
  int mcs = 0;
  double bler = 0.0;
  bool truth_interference = false;

  bool operator==(const KpiSample&) const = default;
};

/// Truth-stripped view of a KpiSample. The labeler, detector and training
/// paths only accept this type.
struct KpiObservation {
  std::int64_t seq = 0;
  std::int64_t ts_ms = 0;
  double snr_db = 0.0;
  int mcs = 0;
  double bler = 0.0;

  bool operator==(const KpiObservation&) const = default;
};

inline KpiObservation observe(const KpiSample& s) {
  return {s.seq, s.ts_ms, s.snr_db, s.mcs, s.bler};
}

enum class Verdict { Clean, Interference };
enum class Label { Unlabeled, Clean, Interference };
enum class LabelSource { Labeler, GroundTruth };

/// Stored form of a labeled sample. The KPI half lives in the `kpi` stream and
/// is recovered by joining on seq.
struct LabelRecord {
  std::int64_t seq = 0;
  Label label = Label::Unlabeled;
  double confidence = 0.0;
  LabelSource source = LabelSource::Labeler;

  bool operator==(const LabelRecord&) const = default;
};

struct DetectionRecord {
  std::int64_t seq = 0;
  double prob = 0.0;
  Verdict verdict = Verdict::Clean;
  std::int64_t model_version = 0;
  std::int64_t latency_us = 0;

  bool operator==(const DetectionRecord&) const = default;
};

inline bool is_interference(Label l) { return l == Label::Interference; }
inline bool is_interference(Verdict v) { return v == Verdict::Interference; }
inline Label to_label(Verdict v) {
  return v == Verdict::Interference ? Label::Interference : Label::Clean;
}

std::string_view to_string(Label l);
std::string_view to_string(Verdict v);
std::string_view to_string(LabelSource s);
std::optional<Label> parse_label(std::string_view s);
std::optional<Verdict> parse_verdict(std::string_view s);
std::optional<LabelSource> parse_label_source(std::string_view s);

/// Checks the KpiSample invariants; returns an empty string when valid.
std::string kpi_violation(const KpiSample& s);
std::string label_violation(const LabelRecord& r);
std::string detection_violation(const DetectionRecord& r);

}  // namespace sajd
