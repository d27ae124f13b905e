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
#include "sajd/types.hpp"

#include <cmath>
#include <string>

namespace sajd {

std::string_view to_string(Label l) {
  switch (l) {
    case Label::Clean:
      return "CLEAN";
    case Label::Interference:
      return "INTERFERENCE";
    case Label::Unlabeled:
      break;
  }
  return "UNLABELED";
}

std::string_view to_string(Verdict v) {
  return v == Verdict::Interference ? "INTERFERENCE" : "CLEAN";
}

std::string_view to_string(LabelSource s) {
  return s == LabelSource::GroundTruth ? "GROUND_TRUTH" : "LABELER";
}

std::optional<Label> parse_label(std::string_view s) {
  if (s == "CLEAN") return Label::Clean;
  if (s == "INTERFERENCE") return Label::Interference;
  if (s == "UNLABELED") return Label::Unlabeled;
  return std::nullopt;
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  if (s == "CLEAN") return Verdict::Clean;
  if (s == "INTERFERENCE") return Verdict::Interference;
  return std::nullopt;
}

std::optional<LabelSource> parse_label_source(std::string_view s) {
  if (s == "LABELER") return LabelSource::Labeler;
  if (s == "GROUND_TRUTH") return LabelSource::GroundTruth;
  return std::nullopt;
}

std::string kpi_violation(const KpiSample& s) {
  if (!std::isfinite(s.snr_db)) return "snr_db is not finite";
  if (s.mcs < 0 || s.mcs > 28) return "mcs " + std::to_string(s.mcs) + " outside [0,28]";
  if (!(s.bler >= 0.0 && s.bler <= 1.0)) return "bler " + std::to_string(s.bler) + " outside [0,1]";
  return {};
}

std::string label_violation(const LabelRecord& r) {
  if (!(r.confidence >= 0.0 && r.confidence <= 1.0)) return "confidence outside [0,1]";
  if ((r.label == Label::Unlabeled) != (r.confidence == 0.0)) {
    return "confidence must be 0 exactly when the record is UNLABELED";
  }
  return {};
}

std::string detection_violation(const DetectionRecord& r) {
  if (!(r.prob >= 0.0 && r.prob <= 1.0)) return "prob outside [0,1]";
  if (r.model_version < 1) return "model_version must be positive";
  if (r.latency_us < 0) return "latency_us must be non-negative";
  return {};
}

}  // namespace sajd
