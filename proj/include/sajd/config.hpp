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

#include "sajd/labeler.hpp"
#include "sajd/mlp.hpp"
#include "sajd/scenario_engine.hpp"
#include "sajd/training_manager.hpp"

namespace sajd {

struct WindowSpec {
  std::string label;
  std::vector<int> scenario_ids;
};

/// `experiment` section of the config file.
struct ExperimentSettings {
  std::optional<std::filesystem::path> schedule_path;
  std::vector<int> baseline_train_scenarios{1, 2, 3, 4, 5, 6};
  /// Empty means the default ON/OFF pair map.
  std::vector<WindowSpec> window_map;
  int duration_samples = kDefaultDurationSamples;
};

/// The whole config document:
///   {"seed": 7, "engine": {...}, "labeler": {...}, "mlp": {...},
///    "loop": {...}, "experiment": {...}}
/// Every section and field is optional; unknown fields are a SchemaError.
struct AppConfig {
  std::uint64_t seed = 7;
  ChannelParams engine;
  LabelerConfig labeler;
  TrainConfig mlp;
  LoopConfig loop;
  ExperimentSettings experiment;
};

AppConfig parse_config(const std::string& json_text);
AppConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const AppConfig& cfg);

}  // namespace sajd
