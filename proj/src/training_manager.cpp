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
#include "sajd/training_manager.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sajd {

namespace {

using nlohmann::json;

json report_json(const TrainReport& r) {
  json epochs = json::array();
  for (const auto& e : r.epochs) epochs.push_back({e.epoch, e.train_loss, e.val_accuracy});
  return {{"best_epoch", r.best_epoch},     {"train_loss", r.train_loss},
          {"train_accuracy", r.train_accuracy}, {"val_accuracy", r.val_accuracy},
          {"train_count", r.train_count},   {"val_count", r.val_count},
          {"class_weighted", r.class_weighted}, {"epochs", epochs}};
}

TrainReport report_from_json(const json& j) {
  TrainReport r;
  r.best_epoch = j.value("best_epoch", 0);
  r.train_loss = j.value("train_loss", 0.0);
  r.train_accuracy = j.value("train_accuracy", 0.0);
  r.val_accuracy = j.value("val_accuracy", 0.0);
  r.train_count = j.value("train_count", std::int64_t{0});
  r.val_count = j.value("val_count", std::int64_t{0});
  r.class_weighted = j.value("class_weighted", false);
  if (j.contains("epochs")) {
    for (const auto& e : j["epochs"]) {
      r.epochs.push_back({e.at(0).get<int>(), e.at(1).get<double>(), e.at(2).get<double>()});
    }
  }
  return r;
}

std::string model_file_name(std::int64_t version) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "v%03lld.model", static_cast<long long>(version));
  return buf;
}

json drift_json(std::int64_t at_seq, const DriftReport& r) {
  return {{"event", "monitor"},
          {"at_seq", at_seq},
          {"window_start_seq", r.window_start_seq},
          {"window_end_seq", r.window_end_seq},
          {"agreement", r.agreement},
          {"sample_count", r.sample_count},
          {"drifted", r.drifted},
          {"trigger_reason", to_string(r.trigger_reason)}};
}

}  // namespace

std::string_view to_string(TriggerReason r) {
  switch (r) {
    case TriggerReason::None:
      return "NONE";
    case TriggerReason::LowAgreement:
      return "LOW_AGREEMENT";
    case TriggerReason::NoModel:
      return "NO_MODEL";
  }
  return "?";
}

DriftReport agreement_report(const std::vector<std::pair<DetectionRecord, LabelRecord>>& pairs,
                             double threshold) {
  DriftReport r;
  if (pairs.empty()) return r;
  std::int64_t agree = 0;
  for (const auto& [det, lab] : pairs) agree += to_label(det.verdict) == lab.label ? 1 : 0;
  r.sample_count = static_cast<std::int64_t>(pairs.size());
  r.window_start_seq = pairs.front().first.seq;
  r.window_end_seq = pairs.back().first.seq;
  r.agreement = static_cast<double>(agree) / static_cast<double>(r.sample_count);
  r.drifted = r.agreement < threshold;
  r.trigger_reason = r.drifted ? TriggerReason::LowAgreement : TriggerReason::None;
  return r;
}

DriftReport monitor(const TelemetryStore& store, std::int64_t from_seq, std::size_t window_size,
                    double threshold) {
  auto pairs = store.join_detections(from_seq, kMaxSeq);
  if (pairs.size() > window_size) {
    pairs.erase(pairs.begin(), pairs.end() - static_cast<std::ptrdiff_t>(window_size));
  }
  return agreement_report(pairs, threshold);
}

ModelRegistry::ModelRegistry(std::optional<std::filesystem::path> root) : root_(std::move(root)) {
  if (root_) std::filesystem::create_directories(*root_);
}

ModelRegistry ModelRegistry::open(const std::filesystem::path& root) {
  ModelRegistry reg(root);
  const auto index = root / "registry.jsonl";
  if (!std::filesystem::exists(index)) return reg;
  std::ifstream in(index);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      RegistryEntry e;
      e.version = j.at("version").get<std::int64_t>();
      e.path = j.at("path").get<std::string>();
      e.deployed = j.at("deployed").get<bool>();
      e.created_at_ms = j.value("created_at_ms", std::int64_t{0});
      e.high_water_seq = j.value("high_water_seq", std::int64_t{0});
      if (j.contains("train_report")) e.train_report = report_from_json(j["train_report"]);
      auto model = std::make_shared<const MlpModel>(load_model(root / e.path));
      reg.models_[e.version] = std::move(model);
      reg.entries_.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw ParseError("registry.jsonl: " + std::string(ex.what()));
    }
  }
  return reg;
}

std::int64_t ModelRegistry::next_version() const {
  return entries_.empty() ? 1 : entries_.back().version + 1;
}

RegistryEntry ModelRegistry::add(MlpModel model, const TrainReport& report,
                                 std::int64_t created_at_ms, std::int64_t high_water_seq) {
  model.version = next_version();
  RegistryEntry e;
  e.version = model.version;
  e.train_report = report;
  e.created_at_ms = created_at_ms;
  e.high_water_seq = high_water_seq;
  if (root_) {
    e.path = model_file_name(e.version);
    save_model(model, *root_ / e.path);
  }
  models_[e.version] = std::make_shared<const MlpModel>(std::move(model));
  entries_.push_back(e);
  persist();
  return e;
}

std::shared_ptr<const MlpModel> ModelRegistry::model(std::int64_t version) const {
  auto it = models_.find(version);
  return it == models_.end() ? nullptr : it->second;
}

std::optional<RegistryEntry> ModelRegistry::entry(std::int64_t version) const {
  for (const auto& e : entries_) {
    if (e.version == version) return e;
  }
  return std::nullopt;
}

std::optional<RegistryEntry> ModelRegistry::deployed() const {
  for (const auto& e : entries_) {
    if (e.deployed) return e;
  }
  return std::nullopt;
}

void ModelRegistry::mark_deployed(std::int64_t version) {
  bool found = false;
  for (auto& e : entries_) {
    e.deployed = e.version == version;
    found = found || e.deployed;
  }
  if (!found) throw ValidationError("registry has no version " + std::to_string(version));
  persist();
}

void ModelRegistry::persist() const {
  if (!root_) return;
  const auto index = *root_ / "registry.jsonl";
  const auto tmp = index.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    for (const auto& e : entries_) {
      json j{{"version", e.version},
             {"path", e.path},
             {"deployed", e.deployed},
             {"created_at_ms", e.created_at_ms},
             {"high_water_seq", e.high_water_seq},
             {"train_report", report_json(e.train_report)}};
      out << j.dump() << '\n';
    }
  }
  std::filesystem::rename(tmp, index);
}

RetrainOutcome retrain(const TelemetryStore& store, const TrainConfig& cfg, ModelRegistry& registry,
                       std::int64_t high_water_seq) {
  RetrainOutcome out;
  const auto pairs = store.join_labels(0, high_water_seq);
  out.examples = static_cast<std::int64_t>(pairs.size());
  if (pairs.empty()) {
    out.noop_reason = "no labeled history";
    return out;
  }
  out.high_water_seq = pairs.back().first.seq;

  std::vector<Example> data;
  data.reserve(pairs.size());
  for (const auto& [kpi, label] : pairs) {
    if (label.source != LabelSource::Labeler) continue;
    data.push_back({features_of(observe(kpi)), is_interference(label.label) ? 1 : 0, 1.0});
  }
  TrainResult result;
  try {
    result = train(data, cfg);
  } catch (const DegenerateDataset& e) {
    out.noop_reason = e.what();
    return out;
  }
  result.model.trained_on.first_seq = pairs.front().first.seq;
  result.model.trained_on.last_seq = out.high_water_seq;
  const auto ts = pairs.back().first.ts_ms;
  out.entry = registry.add(std::move(result.model), result.report, ts, out.high_water_seq);
  return out;
}

DeploymentDecision deploy_if_better(const RegistryEntry& entry, ModelRegistry& registry,
                                    Detector& detector, double gate) {
  DeploymentDecision d;
  d.version = entry.version;
  d.val_accuracy = entry.train_report.val_accuracy;
  d.gate = gate;
  const auto current = registry.entry(entry.version);
  if (!current) {
    d.reason = "version not in registry";
    return d;
  }
  if (current->deployed) {
    d.reason = "version " + std::to_string(entry.version) + " is already deployed";
    return d;
  }
  if (d.val_accuracy < gate) {
    d.reason = "holdout accuracy below deployment gate";
    return d;
  }
  try {
    d.receipt = detector.swap_model(registry.model(entry.version));
  } catch (const StaleModelVersion& e) {
    d.reason = e.what();
    return d;
  }
  registry.mark_deployed(entry.version);
  d.deployed = true;
  d.reason = "deployed";
  return d;
}

void LoopConfig::validate() const {
  if (window_size == 0) throw ValidationError("loop window_size must be > 0");
  if (!(agreement_threshold >= 0.0 && agreement_threshold <= 1.0)) {
    throw ValidationError("loop agreement_threshold must lie in [0,1]");
  }
  if (!(deploy_gate >= 0.0 && deploy_gate <= 1.0)) {
    throw ValidationError("loop deploy_gate must lie in [0,1]");
  }
  train.validate();
}

void LoopTranscript::write_jsonl(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
}

ClosedLoop::ClosedLoop(TelemetryStore& store, Detector& detector, const LabelerConfig& labeler_cfg,
                       ModelRegistry& registry, LoopConfig cfg)
    : store_(store), detector_(detector), labeler_(labeler_cfg), registry_(registry), cfg_(std::move(cfg)) {
  cfg_.validate();
}

void ClosedLoop::log(std::string line) { transcript_.lines.push_back(std::move(line)); }

void ClosedLoop::on_sample(const KpiObservation& obs) {
  // Truth never enters the loop's store.
  store_.append(KpiSample{obs.seq, obs.ts_ms, obs.snr_db, obs.mcs, obs.bler, false});
  if (detector_.has_model()) store_.append(detector_.infer(obs));
  const auto labels = labeler_.push(obs);
  for (const auto& l : labels) store_.append(l);
  if (!labels.empty()) tick(obs.seq, labels.size());
}

void ClosedLoop::finish() {
  const auto labels = labeler_.flush();
  for (const auto& l : labels) store_.append(l);
  if (!labels.empty()) tick(labels.back().seq, labels.size());
}

void ClosedLoop::tick(std::int64_t now_seq, std::size_t new_labels) {
  if (!detector_.has_model()) {
    labels_since_attempt_ += new_labels;
    if (labels_since_attempt_ < cfg_.window_size) return;
    labels_since_attempt_ = 0;
    DriftReport r;
    r.drifted = true;
    r.trigger_reason = TriggerReason::NoModel;
    if (auto last = store_.labels().last_seq()) r.window_end_seq = *last;
    transcript_.reports.push_back({now_seq, r});
    log(drift_json(now_seq, r).dump());
    retrain_and_deploy(now_seq);
    return;
  }

  const std::int64_t from = std::max(monitor_from_seq_, last_monitored_seq_ + 1);
  if (store_.join_detections(from, kMaxSeq).size() < cfg_.window_size) return;

  const auto r = monitor(store_, monitor_from_seq_, cfg_.window_size, cfg_.agreement_threshold);
  last_monitored_seq_ = r.window_end_seq;
  transcript_.reports.push_back({now_seq, r});
  log(drift_json(now_seq, r).dump());
  if (r.drifted) retrain_and_deploy(now_seq);
}

void ClosedLoop::retrain_and_deploy(std::int64_t now_seq) {
  const auto hw = store_.labels().last_seq().value_or(-1);
  auto outcome = retrain(store_, cfg_.train, registry_, hw);
  transcript_.retrains.push_back({now_seq, outcome});
  if (!outcome.entry) {
    log(json{{"event", "retrain_noop"},
             {"at_seq", now_seq},
             {"high_water_seq", outcome.high_water_seq},
             {"examples", outcome.examples},
             {"reason", outcome.noop_reason}}
            .dump());
    return;
  }
  const auto& e = *outcome.entry;
  log(json{{"event", "retrain"},
           {"at_seq", now_seq},
           {"version", e.version},
           {"high_water_seq", e.high_water_seq},
           {"examples", outcome.examples},
           {"val_accuracy", e.train_report.val_accuracy},
           {"best_epoch", e.train_report.best_epoch}}
          .dump());

  auto decision = deploy_if_better(e, registry_, detector_, cfg_.deploy_gate);
  json j{{"event", "deploy"},
         {"at_seq", now_seq},
         {"version", decision.version},
         {"val_accuracy", decision.val_accuracy},
         {"gate", decision.gate},
         {"deployed", decision.deployed},
         {"reason", decision.reason}};
  if (decision.receipt) {
    j["old_version"] = decision.receipt->old_version;
    j["seq_boundary"] = decision.receipt->seq_boundary;
    // Cooldown: monitoring restarts at the swap boundary. Samples up to
    // now_seq were already served (or skipped, on a cold start).
    const auto live_from = std::max(decision.receipt->seq_boundary, now_seq + 1);
    monitor_from_seq_ = live_from;
    last_monitored_seq_ = live_from - 1;
    if (!first_deploy_seq_) first_deploy_seq_ = live_from;
    j["live_from_seq"] = live_from;
  }
  transcript_.deployments.push_back({now_seq, std::move(decision)});
  log(j.dump());
}

LoopTranscript run_loop(SampleSource& source, TelemetryStore& store, Detector& detector,
                        const LabelerConfig& labeler_cfg, ModelRegistry& registry,
                        const LoopConfig& cfg) {
  ClosedLoop loop(store, detector, labeler_cfg, registry, cfg);
  try {
    while (auto s = source.next()) loop.on_sample(*s);
    loop.finish();
  } catch (const std::exception& e) {
    auto t = loop.transcript();
    t.failure = e.what();
    t.lines.push_back(json{{"event", "failure"}, {"reason", e.what()}}.dump());
    return t;
  }
  return loop.transcript();
}

}  // namespace sajd
