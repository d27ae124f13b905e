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
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sajd/detector.hpp"
#include "sajd/labeler.hpp"
#include "sajd/mlp.hpp"
#include "sajd/telemetry_store.hpp"

namespace sajd {

enum class TriggerReason { None, LowAgreement, NoModel };
std::string_view to_string(TriggerReason r);

struct DriftReport {
  std::int64_t window_start_seq = 0;
  std::int64_t window_end_seq = 0;
  /// Meaningful only when sample_count > 0.
  double agreement = 0.0;
  std::int64_t sample_count = 0;
  bool drifted = false;
  TriggerReason trigger_reason = TriggerReason::None;
};

/// Agreement between detector verdicts and labeler labels over the most
/// recent `window_size` seq-matched pairs with seq >= from_seq. Drift is
/// agreement strictly below `threshold`.
DriftReport monitor(const TelemetryStore& store, std::int64_t from_seq = 0,
                    std::size_t window_size = 200, double threshold = 0.85);

/// Same rule over already-joined pairs (all of them).
DriftReport agreement_report(const std::vector<std::pair<DetectionRecord, LabelRecord>>& pairs,
                             double threshold);

struct RegistryEntry {
  std::int64_t version = 0;
  /// Model file, relative to the registry root; empty for in-memory registries.
  std::string path;
  TrainReport train_report;
  bool deployed = false;
  /// Simulated time (ts_ms) of the newest labeled sample in the training set.
  std::int64_t created_at_ms = 0;
  std::int64_t high_water_seq = 0;
};

/// Versioned model store. With a root directory it mirrors itself to
/// `<root>/v<NNN>.model` and `<root>/registry.jsonl`.
class ModelRegistry {
 public:
  explicit ModelRegistry(std::optional<std::filesystem::path> root = std::nullopt);

  /// Loads registry.jsonl and every referenced model from `root`.
  static ModelRegistry open(const std::filesystem::path& root);

  std::int64_t next_version() const;
  /// Stamps model.version = next_version() and records the entry.
  RegistryEntry add(MlpModel model, const TrainReport& report, std::int64_t created_at_ms,
                    std::int64_t high_water_seq);
  std::shared_ptr<const MlpModel> model(std::int64_t version) const;
  std::optional<RegistryEntry> entry(std::int64_t version) const;
  std::optional<RegistryEntry> deployed() const;
  std::vector<RegistryEntry> entries() const { return entries_; }
  void mark_deployed(std::int64_t version);
  const std::optional<std::filesystem::path>& root() const { return root_; }

 private:
  void persist() const;

  std::optional<std::filesystem::path> root_;
  std::vector<RegistryEntry> entries_;
  std::map<std::int64_t, std::shared_ptr<const MlpModel>> models_;
};

struct RetrainOutcome {
  std::optional<RegistryEntry> entry;
  /// Why nothing was trained, when entry is empty.
  std::string noop_reason;
  std::int64_t high_water_seq = -1;
  std::int64_t examples = 0;
};

/// Trains from scratch on every labeler-labeled sample with seq <=
/// high_water_seq and registers the result without deploying it.
RetrainOutcome retrain(const TelemetryStore& store, const TrainConfig& cfg, ModelRegistry& registry,
                       std::int64_t high_water_seq = kMaxSeq);

struct DeploymentDecision {
  std::int64_t version = 0;
  double val_accuracy = 0.0;
  double gate = 0.0;
  bool deployed = false;
  std::optional<SwapReceipt> receipt;
  std::string reason;
};

DeploymentDecision deploy_if_better(const RegistryEntry& entry, ModelRegistry& registry,
                                    Detector& detector, double gate = 0.90);

struct LoopConfig {
  std::size_t window_size = 200;
  double agreement_threshold = 0.85;
  double deploy_gate = 0.90;
  TrainConfig train;

  void validate() const;
};

struct RetrainRecord {
  std::int64_t at_seq = 0;
  RetrainOutcome outcome;
};

struct DeploymentRecord {
  std::int64_t at_seq = 0;
  DeploymentDecision decision;
};

struct MonitorRecord {
  std::int64_t at_seq = 0;
  DriftReport report;
};

struct LoopTranscript {
  std::vector<MonitorRecord> reports;
  std::vector<RetrainRecord> retrains;
  std::vector<DeploymentRecord> deployments;
  /// Every event above, in order, as JSON lines.
  std::vector<std::string> lines;
  std::optional<std::string> failure;

  void write_jsonl(const std::filesystem::path& path) const;
};

/// The closed-loop controller. Feeds each observation through store,
/// detector and labeler, monitors agreement every `window_size` new joined
/// pairs, and on drift (or cold start) retrains and deploys. Single-threaded
/// and deterministic; it only ever sees truth-stripped observations.
class ClosedLoop {
 public:
  ClosedLoop(TelemetryStore& store, Detector& detector, const LabelerConfig& labeler_cfg,
             ModelRegistry& registry, LoopConfig cfg);

  void on_sample(const KpiObservation& obs);
  /// Flushes the labeler's partial window and runs a final controller tick.
  void finish();

  const LoopTranscript& transcript() const { return transcript_; }
  std::optional<std::int64_t> first_deployment_seq() const { return first_deploy_seq_; }

 private:
  void tick(std::int64_t now_seq, std::size_t new_labels);
  void retrain_and_deploy(std::int64_t now_seq);
  void log(std::string line);

  TelemetryStore& store_;
  Detector& detector_;
  LabelerRunner labeler_;
  ModelRegistry& registry_;
  LoopConfig cfg_;
  LoopTranscript transcript_;
  std::int64_t monitor_from_seq_ = 0;
  std::int64_t last_monitored_seq_ = -1;
  std::size_t labels_since_attempt_ = 0;
  std::optional<std::int64_t> first_deploy_seq_;
};

/// Runs the loop over a source until it closes. Component failures stop the
/// loop and are recorded in transcript.failure.
LoopTranscript run_loop(SampleSource& source, TelemetryStore& store, Detector& detector,
                        const LabelerConfig& labeler_cfg, ModelRegistry& registry,
                        const LoopConfig& cfg);

}  // namespace sajd
