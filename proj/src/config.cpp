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
#include "sajd/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace sajd {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& section, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ParseError("config section '" + section + "' must be an object");
  for (const auto& [k, _] : j.items()) {
    bool ok = false;
    for (auto key : keys) ok = ok || k == key;
    if (!ok) throw SchemaError("config section '" + section + "': unknown field '" + k + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Optimizer parse_optimizer(const std::string& s) {
  if (s == "adam") return Optimizer::Adam;
  if (s == "sgd") return Optimizer::Sgd;
  throw SchemaError("config: optimizer must be \"adam\" or \"sgd\"");
}

}  // namespace

AppConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  only_keys(doc, "<root>", {"seed", "engine", "labeler", "mlp", "loop", "experiment"});

  AppConfig cfg;
  try {
    read(doc, "seed", cfg.seed);
    if (doc.contains("engine")) {
      const auto& e = doc["engine"];
      only_keys(e, "engine", {"signal_power_db", "snr_jitter_sigma_db", "ewma_alpha", "la_margin_db", "bler_slope_k"});
      read(e, "signal_power_db", cfg.engine.signal_power_db);
      read(e, "snr_jitter_sigma_db", cfg.engine.snr_jitter_sigma_db);
      read(e, "ewma_alpha", cfg.engine.ewma_alpha);
      read(e, "la_margin_db", cfg.engine.la_margin_db);
      read(e, "bler_slope_k", cfg.engine.bler_slope_k);
    }
    if (doc.contains("labeler")) {
      const auto& l = doc["labeler"];
      only_keys(l, "labeler", {"window_size", "separation_min_db", "smoothing_halfwidth", "baseline_quantile",
                               "baseline_offset_db", "max_deferred_windows", "exact_search_limit"});
      read(l, "window_size", cfg.labeler.window_size);
      read(l, "separation_min_db", cfg.labeler.separation_min_db);
      read(l, "smoothing_halfwidth", cfg.labeler.smoothing_halfwidth);
      read(l, "baseline_quantile", cfg.labeler.baseline_quantile);
      read(l, "baseline_offset_db", cfg.labeler.baseline_offset_db);
      read(l, "max_deferred_windows", cfg.labeler.max_deferred_windows);
      read(l, "exact_search_limit", cfg.labeler.exact_search_limit);
    }
    if (doc.contains("mlp")) {
      const auto& m = doc["mlp"];
      only_keys(m, "mlp", {"epochs", "batch_size", "learning_rate", "optimizer", "seed", "val_fraction",
                           "hidden", "threshold", "imbalance_threshold"});
      read(m, "epochs", cfg.mlp.epochs);
      read(m, "batch_size", cfg.mlp.batch_size);
      read(m, "learning_rate", cfg.mlp.learning_rate);
      if (m.contains("optimizer")) cfg.mlp.optimizer = parse_optimizer(m["optimizer"].get<std::string>());
      read(m, "seed", cfg.mlp.seed);
      read(m, "val_fraction", cfg.mlp.val_fraction);
      read(m, "threshold", cfg.mlp.threshold);
      read(m, "imbalance_threshold", cfg.mlp.imbalance_threshold);
      if (m.contains("hidden")) {
        cfg.mlp.dims = {kNumFeatures};
        for (int h : m["hidden"].get<std::vector<int>>()) cfg.mlp.dims.push_back(h);
        cfg.mlp.dims.push_back(1);
      }
    }
    if (doc.contains("loop")) {
      const auto& l = doc["loop"];
      only_keys(l, "loop", {"window_size", "agreement_threshold", "deploy_gate"});
      read(l, "window_size", cfg.loop.window_size);
      read(l, "agreement_threshold", cfg.loop.agreement_threshold);
      read(l, "deploy_gate", cfg.loop.deploy_gate);
    }
    if (doc.contains("experiment")) {
      const auto& x = doc["experiment"];
      only_keys(x, "experiment", {"schedule", "baseline_train_scenarios", "window_map", "duration_samples"});
      if (x.contains("schedule")) cfg.experiment.schedule_path = x["schedule"].get<std::string>();
      read(x, "baseline_train_scenarios", cfg.experiment.baseline_train_scenarios);
      read(x, "duration_samples", cfg.experiment.duration_samples);
      if (x.contains("window_map")) {
        for (const auto& w : x["window_map"]) {
          only_keys(w, "experiment.window_map", {"label", "scenarios"});
          cfg.experiment.window_map.push_back(
              {w.at("label").get<std::string>(), w.at("scenarios").get<std::vector<int>>()});
        }
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  cfg.loop.train = cfg.mlp;
  validate(cfg.engine);
  cfg.labeler.validate();
  cfg.loop.validate();
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const AppConfig& cfg) {
  std::vector<int> hidden(cfg.mlp.dims.begin() + 1, cfg.mlp.dims.end() - 1);
  json windows = json::array();
  for (const auto& w : cfg.experiment.window_map) {
    windows.push_back({{"label", w.label}, {"scenarios", w.scenario_ids}});
  }
  json experiment{{"baseline_train_scenarios", cfg.experiment.baseline_train_scenarios},
                  {"duration_samples", cfg.experiment.duration_samples}};
  if (!windows.empty()) experiment["window_map"] = windows;
  if (cfg.experiment.schedule_path) experiment["schedule"] = cfg.experiment.schedule_path->string();
  json doc{
      {"seed", cfg.seed},
      {"engine",
       {{"signal_power_db", cfg.engine.signal_power_db},
        {"snr_jitter_sigma_db", cfg.engine.snr_jitter_sigma_db},
        {"ewma_alpha", cfg.engine.ewma_alpha},
        {"la_margin_db", cfg.engine.la_margin_db},
        {"bler_slope_k", cfg.engine.bler_slope_k}}},
      {"labeler",
       {{"window_size", cfg.labeler.window_size},
        {"separation_min_db", cfg.labeler.separation_min_db},
        {"smoothing_halfwidth", cfg.labeler.smoothing_halfwidth},
        {"baseline_quantile", cfg.labeler.baseline_quantile},
        {"baseline_offset_db", cfg.labeler.baseline_offset_db},
        {"max_deferred_windows", cfg.labeler.max_deferred_windows},
        {"exact_search_limit", cfg.labeler.exact_search_limit}}},
      {"mlp",
       {{"epochs", cfg.mlp.epochs},
        {"batch_size", cfg.mlp.batch_size},
        {"learning_rate", cfg.mlp.learning_rate},
        {"optimizer", cfg.mlp.optimizer == Optimizer::Adam ? "adam" : "sgd"},
        {"seed", cfg.mlp.seed},
        {"val_fraction", cfg.mlp.val_fraction},
        {"hidden", hidden},
        {"threshold", cfg.mlp.threshold},
        {"imbalance_threshold", cfg.mlp.imbalance_threshold}}},
      {"loop",
       {{"window_size", cfg.loop.window_size},
        {"agreement_threshold", cfg.loop.agreement_threshold},
        {"deploy_gate", cfg.loop.deploy_gate}}},
      {"experiment", experiment}};
  return doc.dump(2);
}

}  // namespace sajd
