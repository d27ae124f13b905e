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
#include "sajd/scenario_engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace sajd {

namespace {

using nlohmann::json;

std::vector<ScenarioSpec> build_catalog() {
  using E = InterferenceEvent;
  const double noise[] = {0.056, 0.15, 0.33};
  const double power[] = {-8.0, -20.0, -40.0};
  std::vector<ScenarioSpec> out;
  int id = 1;
  // Rows alternate ON/OFF; each interference level sweeps the three noise
  // amplitudes.
  for (double p : power) {
    for (double n : noise) {
      out.push_back({id++, E::On, p, n, kDefaultDurationSamples});
      out.push_back({id++, E::Off, kOffInterferenceDb, n, kDefaultDurationSamples});
    }
  }
  return out;
}

bool in_catalog_domain(const ScenarioSpec& s) {
  const auto near = [](double a, double b) { return std::abs(a - b) < 1e-9; };
  const bool power_ok = near(s.interference_db, -8) || near(s.interference_db, -20) ||
                        near(s.interference_db, -40) ||
                        near(s.interference_db, kOffInterferenceDb);
  const bool noise_ok = near(s.noise_amplitude, 0.056) || near(s.noise_amplitude, 0.15) ||
                        near(s.noise_amplitude, 0.33);
  return power_ok && noise_ok;
}

void mix(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= 1099511628211ull;
  }
}

}  // namespace

std::int64_t ScenarioSchedule::total_samples() const {
  std::int64_t n = 0;
  for (const auto& e : entries) n += e.duration_samples;
  return n;
}

const std::vector<ScenarioSpec>& scenario_catalog() {
  static const std::vector<ScenarioSpec> catalog = build_catalog();
  return catalog;
}

ScenarioSpec catalog_scenario(int id, int duration_samples) {
  const auto& cat = scenario_catalog();
  if (id < 1 || id > static_cast<int>(cat.size())) {
    throw ValidationError("scenario id " + std::to_string(id) + " is not in the catalog");
  }
  ScenarioSpec s = cat[static_cast<std::size_t>(id - 1)];
  s.duration_samples = duration_samples;
  return s;
}

void validate(const ScenarioSpec& spec) {
  const std::string where = "scenario " + std::to_string(spec.id) + ": ";
  if (!std::isfinite(spec.interference_db) || !std::isfinite(spec.noise_amplitude)) {
    throw ValidationError(where + "non-finite power or noise amplitude");
  }
  if (spec.event == InterferenceEvent::Off && spec.interference_db != kOffInterferenceDb) {
    throw ValidationError(where + "event OFF requires interference_db = -100");
  }
  if (!(spec.noise_amplitude > 0.0)) throw ValidationError(where + "noise_amplitude must be > 0");
  if (spec.duration_samples <= 0) throw ValidationError(where + "duration_samples must be > 0");
}

void validate(const ChannelParams& p) {
  if (!std::isfinite(p.signal_power_db) || !std::isfinite(p.snr_jitter_sigma_db) ||
      !std::isfinite(p.la_margin_db) || !std::isfinite(p.bler_slope_k) ||
      !std::isfinite(p.ewma_alpha)) {
    throw ValidationError("channel parameters must be finite");
  }
  if (!(p.ewma_alpha > 0.0 && p.ewma_alpha <= 1.0)) {
    throw ValidationError("ewma_alpha must lie in (0,1]");
  }
  if (p.snr_jitter_sigma_db < 0.0) throw ValidationError("snr_jitter_sigma_db must be >= 0");
}

void validate(const ScenarioSchedule& schedule) {
  if (schedule.entries.empty()) throw ValidationError("schedule has no entries");
  for (const auto& e : schedule.entries) validate(e);
}

ScenarioSchedule parse_schedule(const std::string& json_text, std::uint64_t seed) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("schedule: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("scenarios") || !doc["scenarios"].is_array()) {
    throw ParseError("schedule: expected an object with a \"scenarios\" array");
  }

  ScenarioSchedule out;
  out.seed = seed;
  int default_duration = kDefaultDurationSamples;
  if (doc.contains("default_duration_samples")) {
    default_duration = doc["default_duration_samples"].get<int>();
  }

  std::size_t index = 0;
  for (const auto& item : doc["scenarios"]) {
    const std::string where = "schedule entry " + std::to_string(index++) + ": ";
    if (!item.is_object()) throw ParseError(where + "expected an object");
    for (const auto& [key, _] : item.items()) {
      if (key != "id" && key != "event" && key != "interference_db" &&
          key != "noise_amplitude" && key != "duration_samples") {
        throw ParseError(where + "unknown field '" + key + "'");
      }
    }
    if (!item.contains("id") || !item["id"].is_number_integer()) {
      throw ParseError(where + "missing integer 'id'");
    }
    try {
      ScenarioSpec spec;
      spec.id = item["id"].get<int>();
      const bool from_catalog =
          spec.id >= 1 && spec.id <= static_cast<int>(scenario_catalog().size());
      if (from_catalog) {
        spec = catalog_scenario(spec.id, default_duration);
      } else if (!item.contains("event") || !item.contains("noise_amplitude")) {
        throw ParseError(where + "custom scenario needs 'event' and 'noise_amplitude'");
      } else {
        spec.duration_samples = default_duration;
      }
      if (item.contains("event")) {
        const auto ev = item["event"].get<std::string>();
        if (ev == "ON") {
          spec.event = InterferenceEvent::On;
        } else if (ev == "OFF") {
          spec.event = InterferenceEvent::Off;
          spec.interference_db = kOffInterferenceDb;
        } else {
          throw ParseError(where + "event must be \"ON\" or \"OFF\"");
        }
      }
      if (item.contains("interference_db")) {
        spec.interference_db = item["interference_db"].get<double>();
      } else if (spec.event == InterferenceEvent::On && !from_catalog) {
        throw ParseError(where + "ON scenario needs 'interference_db'");
      }
      if (item.contains("noise_amplitude")) {
        spec.noise_amplitude = item["noise_amplitude"].get<double>();
      }
      if (item.contains("duration_samples")) {
        spec.duration_samples = item["duration_samples"].get<int>();
      }
      validate(spec);
      if (!from_catalog || !in_catalog_domain(spec)) {
        std::ostringstream w;
        w << where << "custom scenario id " << spec.id << " ("
          << (spec.jammed() ? "ON" : "OFF") << ", " << spec.interference_db << " dB, "
          << spec.noise_amplitude << ") is outside the catalog domain";
        out.warnings.push_back(w.str());
      }
      out.entries.push_back(spec);
    } catch (const json::exception& e) {
      throw ParseError(where + e.what());
    }
  }
  validate(out);
  return out;
}

ScenarioSchedule load_schedule(const std::filesystem::path& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schedule file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_schedule(buf.str(), seed);
}

ScenarioSchedule catalog_schedule(std::uint64_t seed, int duration_samples) {
  ScenarioSchedule s;
  s.seed = seed;
  for (const auto& spec : scenario_catalog()) {
    auto e = spec;
    e.duration_samples = duration_samples;
    s.entries.push_back(e);
  }
  return s;
}

std::string schedule_to_json(const ScenarioSchedule& schedule) {
  json arr = json::array();
  for (const auto& e : schedule.entries) {
    arr.push_back({{"id", e.id},
                   {"event", e.jammed() ? "ON" : "OFF"},
                   {"interference_db", e.interference_db},
                   {"noise_amplitude", e.noise_amplitude},
                   {"duration_samples", e.duration_samples}});
  }
  return json{{"scenarios", arr}}.dump(2);
}

double sinr_db(const ScenarioSpec& spec, const ChannelParams& params) {
  const double noise_db = 20.0 * std::log10(spec.noise_amplitude);
  const double impairment = std::pow(10.0, noise_db / 10.0) + std::pow(10.0, spec.interference_db / 10.0);
  return params.signal_power_db - 10.0 * std::log10(impairment);
}

int mcs_for_snr(double snr_smoothed_db, const ChannelParams& params) {
  if (!std::isfinite(snr_smoothed_db)) throw ValidationError("mcs_for_snr: non-finite SNR");
  const double x = (snr_smoothed_db - params.la_margin_db + 6.0) * kMaxMcs / 36.0;
  // Clamp before rounding so huge inputs cannot overflow lround.
  const double clamped = std::clamp(x, 0.0, static_cast<double>(kMaxMcs));
  return static_cast<int>(std::lround(clamped));
}

double mcs_threshold_db(int mcs) { return -6.0 + 36.0 * mcs / kMaxMcs; }

double bler_for(double snr_inst_db, int mcs_used, const ChannelParams& params) {
  const double z = params.bler_slope_k * (snr_inst_db - mcs_threshold_db(mcs_used));
  return 1.0 / (1.0 + std::exp(z));
}

void StreamDigest::add(const KpiSample& s) {
  mix(state_, static_cast<std::uint64_t>(s.seq));
  mix(state_, static_cast<std::uint64_t>(s.ts_ms));
  mix(state_, std::bit_cast<std::uint64_t>(s.snr_db));
  mix(state_, static_cast<std::uint64_t>(s.mcs));
  mix(state_, std::bit_cast<std::uint64_t>(s.bler));
  mix(state_, s.truth_interference ? 1u : 0u);
}

StreamSummary synth_stream(const ScenarioSchedule& schedule, const ChannelParams& params,
                           const SampleSink& sink) {
  validate(schedule);
  validate(params);

  std::mt19937_64 rng(schedule.seed);
  std::normal_distribution<double> jitter(0.0, params.snr_jitter_sigma_db > 0.0
                                                   ? params.snr_jitter_sigma_db
                                                   : 1.0);
  const bool use_jitter = params.snr_jitter_sigma_db > 0.0;

  StreamSummary summary;
  StreamDigest digest;
  std::int64_t seq = 0;
  double ewma = 0.0;
  bool ewma_ready = false;

  for (std::size_t i = 0; i < schedule.entries.size(); ++i) {
    const auto& spec = schedule.entries[i];
    const double mean_snr = sinr_db(spec, params);
    summary.segments.push_back({i, spec.id, spec.jammed(), seq, 0});
    for (int k = 0; k < spec.duration_samples; ++k, ++seq) {
      KpiSample s;
      s.seq = seq;
      s.ts_ms = seq * kSamplePeriodMs;
      s.snr_db = mean_snr + (use_jitter ? jitter(rng) : 0.0);
      if (!ewma_ready) {
        ewma = s.snr_db;
        ewma_ready = true;
      }
      // MCS is picked from the history only, so it lags sudden SNR changes.
      s.mcs = mcs_for_snr(ewma, params);
      s.bler = bler_for(s.snr_db, s.mcs, params);
      s.truth_interference = spec.jammed();
      ewma = params.ewma_alpha * s.snr_db + (1.0 - params.ewma_alpha) * ewma;

      try {
        sink(s);
      } catch (const std::exception& e) {
        summary.aborted = true;
        summary.abort_reason = e.what();
        summary.digest = digest.value();
        throw StreamAborted(summary, e.what());
      }
      digest.add(s);
      ++summary.samples_emitted;
      ++summary.segments.back().count;
    }
  }
  summary.digest = digest.value();
  return summary;
}

std::vector<KpiSample> synth_samples(const ScenarioSchedule& schedule, const ChannelParams& params,
                                     StreamSummary* summary) {
  std::vector<KpiSample> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, schedule.total_samples())));
  auto s = synth_stream(schedule, params, [&](const KpiSample& k) { out.push_back(k); });
  if (summary) *summary = std::move(s);
  return out;
}

}  // namespace sajd
