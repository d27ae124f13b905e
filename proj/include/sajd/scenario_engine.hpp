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
#include <functional>
#include <string>
#include <vector>

#include "sajd/error.hpp"
#include "sajd/types.hpp"

namespace sajd {

enum class InterferenceEvent { On, Off };

/// Interference power used to encode "jammer off".
inline constexpr double kOffInterferenceDb = -100.0;
inline constexpr int kDefaultDurationSamples = 300;
inline constexpr std::int64_t kSamplePeriodMs = 100;
inline constexpr int kMaxMcs = 28;

struct ScenarioSpec {
  int id = 0;
  InterferenceEvent event = InterferenceEvent::Off;
  double interference_db = kOffInterferenceDb;
  double noise_amplitude = 0.056;
  int duration_samples = kDefaultDurationSamples;

  bool jammed() const { return event == InterferenceEvent::On; }
};

struct ScenarioSchedule {
  std::vector<ScenarioSpec> entries;
  std::uint64_t seed = 0;
  /// Non-fatal notes, e.g. custom scenarios outside the catalog domain.
  std::vector<std::string> warnings;

  std::int64_t total_samples() const;
};

struct ChannelParams {
  double signal_power_db = 0.0;
  double snr_jitter_sigma_db = 0.5;
  double ewma_alpha = 0.1;
  double la_margin_db = 1.0;
  double bler_slope_k = 1.0;
};

/// The 18 interference/noise scenarios of the reference testbed, in order.
const std::vector<ScenarioSpec>& scenario_catalog();
/// Catalog lookup; throws ValidationError for ids outside 1..18.
ScenarioSpec catalog_scenario(int id, int duration_samples = kDefaultDurationSamples);

void validate(const ScenarioSpec& spec);
void validate(const ChannelParams& params);
void validate(const ScenarioSchedule& schedule);

/// Parses a JSON schedule document:
///   {"scenarios": [{"id": 1}, {"id": 19, "event": "ON", "interference_db": -30,
///                  "noise_amplitude": 0.2, "duration_samples": 100}]}
/// Entries naming a catalog id inherit the catalog fields; explicit fields
/// override them. Custom values are accepted with a warning.
ScenarioSchedule parse_schedule(const std::string& json_text, std::uint64_t seed);
ScenarioSchedule load_schedule(const std::filesystem::path& path, std::uint64_t seed);
ScenarioSchedule catalog_schedule(std::uint64_t seed,
                                  int duration_samples = kDefaultDurationSamples);
std::string schedule_to_json(const ScenarioSchedule& schedule);

/// Mean SINR before jitter: interference and noise add in linear power.
double sinr_db(const ScenarioSpec& spec, const ChannelParams& params);

/// Link adaptation. Monotone non-decreasing in the smoothed SNR.
int mcs_for_snr(double snr_smoothed_db, const ChannelParams& params);

/// SNR at which the given MCS sees 50% BLER.
double mcs_threshold_db(int mcs);

/// Logistic BLER response around the MCS threshold.
double bler_for(double snr_inst_db, int mcs_used, const ChannelParams& params);

struct ScenarioSegment {
  std::size_t entry_index = 0;
  int scenario_id = 0;
  bool jammed = false;
  std::int64_t first_seq = 0;
  std::int64_t count = 0;
};

struct StreamSummary {
  std::int64_t samples_emitted = 0;
  /// FNV-1a over the emitted sample bytes; equal digests mean equal streams.
  std::uint64_t digest = 0;
  std::vector<ScenarioSegment> segments;
  bool aborted = false;
  std::string abort_reason;
};

/// Thrown when the sink fails; carries the summary up to the failing sample.
class StreamAborted : public Error {
 public:
  StreamAborted(StreamSummary partial, const std::string& why)
      : Error("telemetry stream aborted: " + why), partial_(std::move(partial)) {}
  const StreamSummary& partial() const { return partial_; }

 private:
  StreamSummary partial_;
};

using SampleSink = std::function<void(const KpiSample&)>;

/// Incremental digest over KpiSample values, shared by the engine and the
/// experiment harness so both sides can compare streams.
class StreamDigest {
 public:
  void add(const KpiSample& s);
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 14695981039346656037ull;
};

/// Emits every sample of the schedule into `sink`. Deterministic given
/// schedule.seed.
StreamSummary synth_stream(const ScenarioSchedule& schedule, const ChannelParams& params,
                           const SampleSink& sink);

/// Convenience wrapper collecting the stream into memory.
std::vector<KpiSample> synth_samples(const ScenarioSchedule& schedule,
                                     const ChannelParams& params,
                                     StreamSummary* summary = nullptr);

}  // namespace sajd
