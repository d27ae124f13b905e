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
#include "sajd/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sajd/detector.hpp"
#include "sajd/telemetry_store.hpp"

namespace sajd {

namespace {

using nlohmann::json;

std::string fixed(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed: " + p.string());
}

double ratio(std::int64_t hit, std::int64_t n) {
  return n == 0 ? std::nan("") : static_cast<double>(hit) / static_cast<double>(n);
}

// Per-window accuracy of one arm's detections against truth.
void score_arm(const std::vector<KpiSample>& samples, const std::vector<DetectionRecord>& dets,
               std::int64_t first_seq, std::int64_t count, double& acc, std::int64_t& scored) {
  const std::int64_t lo = first_seq, hi = first_seq + count - 1;
  auto it = std::lower_bound(dets.begin(), dets.end(), lo,
                             [](const DetectionRecord& d, std::int64_t s) { return d.seq < s; });
  std::int64_t hit = 0;
  scored = 0;
  // Samples carry seq == index, which the engine guarantees.
  for (; it != dets.end() && it->seq <= hi; ++it) {
    ++scored;
    hit += is_interference(it->verdict) == samples[static_cast<std::size_t>(it->seq)].truth_interference;
  }
  acc = ratio(hit, scored);
}

const char* kPlotScript = R"(# gnuplot script: per-window detection accuracy, SAJD vs static baseline.
# Usage: gnuplot plot_accuracy.gp   (writes accuracy_by_window.png)
set terminal pngcairo size 900,450
set output 'accuracy_by_window.png'
set style data histograms
set style histogram clustered gap 1
set style fill solid 0.8 border -1
set yrange [0:1.05]
set ylabel 'accuracy'
set xlabel 'window'
set key bottom right
set datafile missing 'nan'
plot 'accuracy_by_window.dat' using 3:xtic(2) title 'SAJD', '' using 4 title 'baseline'
)";

}  // namespace

ExperimentConfig ExperimentConfig::from(const AppConfig& app) {
  ExperimentConfig cfg;
  cfg.seed = app.seed;
  cfg.schedule = app.experiment.schedule_path
                     ? load_schedule(*app.experiment.schedule_path, app.seed)
                     : catalog_schedule(app.seed, app.experiment.duration_samples);
  cfg.baseline_train_scenarios = app.experiment.baseline_train_scenarios;
  cfg.window_map = app.experiment.window_map;
  cfg.engine = app.engine;
  cfg.labeler = app.labeler;
  cfg.loop = app.loop;
  cfg.loop.train = app.mlp;
  return cfg;
}

std::vector<WindowSpec> default_window_map(const ScenarioSchedule& schedule) {
  std::vector<WindowSpec> out;
  const auto& e = schedule.entries;
  for (std::size_t i = 0, w = 0; i < e.size(); i += 2, ++w) {
    WindowSpec spec;
    spec.label = std::to_string(w / 6 + 1) + static_cast<char>('a' + w % 6);
    spec.scenario_ids.push_back(e[i].id);
    if (i + 1 < e.size()) spec.scenario_ids.push_back(e[i + 1].id);
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<ResolvedWindow> resolve_windows(const ScenarioSchedule& schedule,
                                            const std::vector<WindowSpec>& map) {
  std::vector<ResolvedWindow> out;
  std::size_t pos = 0;
  for (const auto& w : map) {
    if (w.scenario_ids.empty()) throw ValidationError("window '" + w.label + "' lists no scenarios");
    ResolvedWindow r{w.label, w.scenario_ids, pos, w.scenario_ids.size()};
    for (int id : w.scenario_ids) {
      if (pos >= schedule.entries.size() || schedule.entries[pos].id != id) {
        throw ValidationError("window '" + w.label + "': scenario " + std::to_string(id) +
                              " does not match schedule entry " + std::to_string(pos));
      }
      ++pos;
    }
    out.push_back(std::move(r));
  }
  if (pos != schedule.entries.size()) {
    throw ValidationError("window_map leaves schedule entry " + std::to_string(pos) + " (scenario " +
                          std::to_string(schedule.entries[pos].id) + ") uncovered");
  }
  return out;
}

void validate(const ExperimentConfig& cfg) {
  validate(cfg.schedule);
  validate(cfg.engine);
  cfg.labeler.validate();
  cfg.loop.validate();
  if (cfg.baseline_train_scenarios.empty()) throw ValidationError("baseline_train_scenarios is empty");
  std::set<int> scheduled;
  for (const auto& e : cfg.schedule.entries) scheduled.insert(e.id);
  for (int id : cfg.baseline_train_scenarios) {
    if (!scheduled.count(id)) {
      throw ValidationError("baseline scenario " + std::to_string(id) + " is not in the schedule");
    }
  }
  resolve_windows(cfg.schedule, cfg.window_map.empty() ? default_window_map(cfg.schedule) : cfg.window_map);
}

std::vector<ScenarioSegment> segment_trace(const std::vector<KpiSample>& trace,
                                           const ScenarioSchedule* schedule) {
  std::vector<ScenarioSegment> out;
  if (schedule) {
    if (schedule->total_samples() != static_cast<std::int64_t>(trace.size())) {
      throw ValidationError("trace has " + std::to_string(trace.size()) + " samples but the schedule covers " +
                            std::to_string(schedule->total_samples()));
    }
    std::int64_t at = 0;
    for (std::size_t i = 0; i < schedule->entries.size(); ++i) {
      const auto& e = schedule->entries[i];
      out.push_back({i, e.id, e.event == InterferenceEvent::On, trace.empty() ? 0 : trace[at].seq,
                     e.duration_samples});
      at += e.duration_samples;
    }
    return out;
  }
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i == 0 || trace[i].truth_interference != trace[i - 1].truth_interference) {
      out.push_back({out.size(), 0, trace[i].truth_interference, trace[i].seq, 0});
    }
    ++out.back().count;
  }
  return out;
}

std::vector<LabelRecord> label_trace(const std::vector<KpiSample>& trace, const LabelerConfig& cfg) {
  LabelerRunner runner(cfg);
  std::vector<LabelRecord> out;
  out.reserve(trace.size());
  for (const auto& s : trace) {
    auto got = runner.push(observe(s));
    out.insert(out.end(), got.begin(), got.end());
  }
  auto rest = runner.flush();
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

std::vector<ScenarioAccuracy> score_labels(const std::vector<KpiSample>& trace,
                                           const std::vector<LabelRecord>& labels,
                                           const std::vector<ScenarioSegment>& segments,
                                           int exclude_halfwidth) {
  std::map<std::int64_t, Label> by_seq;
  for (const auto& l : labels) by_seq[l.seq] = l.label;

  // Positions within `exclude_halfwidth` of an ON/OFF boundary.
  std::vector<bool> near(trace.size(), false);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].truth_interference == trace[i - 1].truth_interference) continue;
    const auto h = static_cast<std::size_t>(exclude_halfwidth);
    const std::size_t lo = i >= h ? i - h : 0;
    for (std::size_t k = lo; k < std::min(trace.size(), i + h); ++k) near[k] = true;
  }

  std::vector<ScenarioAccuracy> out;
  std::size_t pos = 0;
  for (const auto& seg : segments) {
    ScenarioAccuracy row{seg.entry_index, seg.scenario_id, seg.jammed, seg.count, 0, 0, 0};
    std::int64_t hit = 0, kept = 0, kept_hit = 0;
    for (std::int64_t k = 0; k < seg.count; ++k, ++pos) {
      const auto& s = trace.at(pos);
      const auto it = by_seq.find(s.seq);
      const bool ok = it != by_seq.end() && (it->second == Label::Interference) == s.truth_interference;
      hit += ok;
      if (near[pos]) {
        ++row.excluded;
      } else {
        ++kept;
        kept_hit += ok;
      }
    }
    row.raw_acc = ratio(hit, seg.count);
    row.transition_excluded_acc = ratio(kept_hit, kept);
    out.push_back(row);
  }
  return out;
}

std::string labeler_csv(const std::vector<ScenarioAccuracy>& rows) {
  std::ostringstream os;
  os << kLabelerCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.entry_index << ',' << r.scenario_id << ',' << (r.jammed ? 1 : 0) << ',' << r.count << ','
       << fixed(r.raw_acc) << ',' << fixed(r.transition_excluded_acc) << ',' << r.excluded << '\n';
  }
  return os.str();
}

std::string window_csv(const std::vector<WindowAccuracy>& rows) {
  std::ostringstream os;
  os << kWindowCsvHeader << '\n';
  for (const auto& w : rows) os << w.label << ',' << fixed(w.sajd_acc) << ',' << fixed(w.baseline_acc) << '\n';
  return os.str();
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const auto windows =
      resolve_windows(cfg.schedule, cfg.window_map.empty() ? default_window_map(cfg.schedule) : cfg.window_map);

  ScenarioSchedule schedule = cfg.schedule;
  schedule.seed = cfg.seed;
  StreamSummary summary;
  const auto samples = synth_samples(schedule, cfg.engine, &summary);

  ExperimentReport rep;
  rep.samples = static_cast<std::int64_t>(samples.size());
  rep.baseline_scenarios = cfg.baseline_train_scenarios;

  // Arm A: static baseline. Labels come from the labeler run over the
  // training scenarios only; truth is never consulted.
  {
    const std::set<int> train_ids(cfg.baseline_train_scenarios.begin(), cfg.baseline_train_scenarios.end());
    std::vector<KpiSample> subset;
    for (const auto& seg : summary.segments) {
      if (!train_ids.count(seg.scenario_id)) continue;
      for (std::int64_t k = 0; k < seg.count; ++k) subset.push_back(samples[static_cast<std::size_t>(seg.first_seq + k)]);
    }
    const auto labels = label_trace(subset, cfg.labeler);
    std::map<std::int64_t, Label> by_seq;
    for (const auto& l : labels) by_seq[l.seq] = l.label;
    std::vector<Example> data;
    for (const auto& s : subset) {
      const auto it = by_seq.find(s.seq);
      if (it == by_seq.end() || it->second == Label::Unlabeled) continue;
      data.push_back({features_of(observe(s)), it->second == Label::Interference ? 1 : 0, 1.0});
    }
    auto trained = train(data, cfg.loop.train);
    trained.model.version = 1;
    rep.baseline_train = trained.report;

    Detector det;
    det.swap_model(std::move(trained.model));
    TelemetryStore store;
    StreamDigest digest;
    std::vector<KpiObservation> obs;
    obs.reserve(samples.size());
    for (const auto& s : samples) {
      digest.add(s);
      obs.push_back(observe(s));
    }
    VectorSource src(std::move(obs));
    const auto ds = run_detector(det, src, store);
    if (ds.aborted) throw Error("baseline arm aborted: " + ds.abort_reason);
    rep.digest_baseline = digest.value();
    const auto dets = store.detections().all();
    for (const auto& w : windows) {
      WindowAccuracy wa;
      wa.label = w.label;
      wa.scenario_ids = w.scenario_ids;
      wa.first_seq = summary.segments[w.first_entry].first_seq;
      for (std::size_t i = 0; i < w.entry_count; ++i) wa.count += summary.segments[w.first_entry + i].count;
      score_arm(samples, dets, wa.first_seq, wa.count, wa.baseline_acc, wa.baseline_scored);
      rep.windows.push_back(std::move(wa));
    }
  }

  // Arm B: closed loop from a cold start.
  {
    std::optional<std::filesystem::path> reg_root;
    if (!cfg.output_dir.empty()) {
      reg_root = cfg.output_dir / "models";
      if (std::filesystem::exists(*reg_root)) {
        for (const auto& f : std::filesystem::directory_iterator(*reg_root)) {
          if (f.path().extension() == ".model") std::filesystem::remove(f.path());
        }
      }
    }
    ModelRegistry registry(reg_root);
    Detector det;
    TelemetryStore store;
    ClosedLoop loop(store, det, cfg.labeler, registry, cfg.loop);
    StreamDigest digest;
    try {
      for (const auto& s : samples) {
        digest.add(s);
        loop.on_sample(observe(s));
      }
      loop.finish();
    } catch (const std::exception& e) {
      rep.transcript = loop.transcript();
      rep.transcript.failure = e.what();
      throw Error(std::string("closed-loop arm failed: ") + e.what());
    }
    rep.digest_sajd = digest.value();
    rep.transcript = loop.transcript();
    rep.first_deployment_seq = loop.first_deployment_seq();
    const auto dets = store.detections().all();
    for (auto& wa : rep.windows) score_arm(samples, dets, wa.first_seq, wa.count, wa.sajd_acc, wa.sajd_scored);

    // The loop's labels are the same procedure over the same observations,
    // so they double as the per-scenario labeler evaluation.
    rep.labeler = score_labels(samples, store.labels().all(), summary.segments, cfg.labeler.smoothing_halfwidth);
  }

  if (rep.digest_baseline != rep.digest_sajd || rep.digest_sajd != summary.digest) {
    throw Error("arms consumed different sample streams");
  }
  rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

void write_artifacts(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "accuracy_by_window.csv", window_csv(report.windows));

  std::ostringstream dat;
  dat << "# index window sajd_acc baseline_acc\n";
  for (std::size_t i = 0; i < report.windows.size(); ++i) {
    const auto& w = report.windows[i];
    dat << i << ' ' << w.label << ' ' << fixed(w.sajd_acc) << ' ' << fixed(w.baseline_acc) << '\n';
  }
  write_text(dir / "accuracy_by_window.dat", dat.str());
  write_text(dir / "plot_accuracy.gp", kPlotScript);
  write_text(dir / "labeler_by_scenario.csv", labeler_csv(report.labeler));
  report.transcript.write_jsonl(dir / "transcript.jsonl");

  json windows = json::array();
  for (const auto& w : report.windows) {
    windows.push_back({{"window", w.label},
                       {"scenarios", w.scenario_ids},
                       {"first_seq", w.first_seq},
                       {"samples", w.count},
                       {"sajd_scored", w.sajd_scored},
                       {"baseline_scored", w.baseline_scored}});
  }
  json summary{{"samples", report.samples},
               {"stream_digest", report.digest_sajd},
               {"first_deployment_seq",
                report.first_deployment_seq ? json(*report.first_deployment_seq) : json(nullptr)},
               {"retrains", report.transcript.retrains.size()},
               {"deployments", report.transcript.deployments.size()},
               {"baseline_scenarios", report.baseline_scenarios},
               {"baseline_val_accuracy", report.baseline_train.val_accuracy},
               {"windows", windows},
               {"failure", report.transcript.failure ? json(*report.transcript.failure) : json(nullptr)},
               {"runtime_s", report.runtime_s}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
}

}  // namespace sajd
