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
#include <optional>
#include <string>
#include <vector>

#include "sajd/config.hpp"
#include "sajd/labeler.hpp"
#include "sajd/scenario_engine.hpp"
#include "sajd/training_manager.hpp"
#include "sajd/types.hpp"

namespace sajd {

struct ExperimentConfig {
  ScenarioSchedule schedule;
  std::vector<int> baseline_train_scenarios{1, 2, 3, 4, 5, 6};
  /// Empty means default_window_map(schedule).
  std::vector<WindowSpec> window_map;
  std::uint64_t seed = 7;
  std::filesystem::path output_dir;
  ChannelParams engine;
  LabelerConfig labeler;
  LoopConfig loop;

  static ExperimentConfig from(const AppConfig& app);
};

/// Consecutive schedule entries grouped into pairs, labeled 1a..1f, 2a..2f,
/// 3a.. (six windows per pass); an odd trailing entry forms its own window.
std::vector<WindowSpec> default_window_map(const ScenarioSchedule& schedule);

/// A window_map entry resolved against the schedule.
struct ResolvedWindow {
  std::string label;
  std::vector<int> scenario_ids;
  std::size_t first_entry = 0;
  std::size_t entry_count = 0;
};

/// Walks the schedule in order, matching each window's ids against the next
/// entries. Throws ValidationError unless the map covers every entry exactly
/// once, in order.
std::vector<ResolvedWindow> resolve_windows(const ScenarioSchedule& schedule,
                                            const std::vector<WindowSpec>& map);

void validate(const ExperimentConfig& cfg);

struct WindowAccuracy {
  std::string label;
  std::vector<int> scenario_ids;
  std::int64_t first_seq = 0;
  std::int64_t count = 0;
  /// NaN when the arm produced no detection inside the window.
  double sajd_acc = 0.0;
  double baseline_acc = 0.0;
  std::int64_t sajd_scored = 0;
  std::int64_t baseline_scored = 0;
};

struct ScenarioAccuracy {
  std::size_t entry_index = 0;
  int scenario_id = 0;
  bool jammed = false;
  std::int64_t count = 0;
  double raw_acc = 0.0;
  double transition_excluded_acc = 0.0;
  std::int64_t excluded = 0;
};

struct ExperimentReport {
  std::vector<WindowAccuracy> windows;
  std::vector<ScenarioAccuracy> labeler;
  LoopTranscript transcript;
  std::optional<std::int64_t> first_deployment_seq;
  std::int64_t samples = 0;
  std::uint64_t digest_baseline = 0;
  std::uint64_t digest_sajd = 0;
  TrainReport baseline_train;
  /// Scenario ids the baseline was trained on.
  std::vector<int> baseline_scenarios;
  double runtime_s = 0.0;
};

/// Runs both arms over the identical stream. Throws on component failure.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Writes accuracy_by_window.{csv,dat}, labeler_by_scenario.csv,
/// transcript.jsonl, summary.json and plot_accuracy.gp into `dir`.
void write_artifacts(const ExperimentReport& report, const std::filesystem::path& dir);

/// Segments a truth-carrying trace. With a schedule, segments follow its
/// entries (lengths must add up); otherwise they follow runs of equal truth.
std::vector<ScenarioSegment> segment_trace(const std::vector<KpiSample>& trace,
                                           const ScenarioSchedule* schedule);

/// Runs the labeler over the truth-stripped trace.
std::vector<LabelRecord> label_trace(const std::vector<KpiSample>& trace, const LabelerConfig& cfg);

/// Per-segment labeler accuracy. `exclude_halfwidth` samples either side of
/// each truth change are dropped from the transition-excluded column.
std::vector<ScenarioAccuracy> score_labels(const std::vector<KpiSample>& trace,
                                           const std::vector<LabelRecord>& labels,
                                           const std::vector<ScenarioSegment>& segments,
                                           int exclude_halfwidth);

inline constexpr const char* kLabelerCsvHeader =
    "entry,scenario,jammed,samples,raw_acc,transition_excluded_acc,excluded";
inline constexpr const char* kWindowCsvHeader = "window,sajd_acc,baseline_acc";

std::string labeler_csv(const std::vector<ScenarioAccuracy>& rows);
std::string window_csv(const std::vector<WindowAccuracy>& rows);

}  // namespace sajd
