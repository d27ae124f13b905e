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
// sajd: command-line front end for the simulator, labeler evaluation, the
// two-arm experiment, offline replay and registry deployment.
//
// Exit codes: 0 success, 1 run-time failure, 2 usage or configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sajd/config.hpp"
#include "sajd/detector.hpp"
#include "sajd/experiment.hpp"
#include "sajd/telemetry_store.hpp"
#include "sajd/training_manager.hpp"

namespace fs = std::filesystem;
using namespace sajd;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

// Raised for bad inputs detected by the CLI itself; maps to exit code 2.
struct UsageError : Error {
  using Error::Error;
};

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

AppConfig load_app(const Globals& g) {
  AppConfig cfg = g.config_path.empty() ? AppConfig{} : load_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

ScenarioSchedule schedule_for(const AppConfig& cfg, const std::string& path) {
  if (!path.empty()) return load_schedule(path, cfg.seed);
  if (cfg.experiment.schedule_path) return load_schedule(*cfg.experiment.schedule_path, cfg.seed);
  return catalog_schedule(cfg.seed, cfg.experiment.duration_samples);
}

fs::path out_file(const Globals& g, const char* name) {
  fs::create_directories(g.out);
  return fs::path(g.out) / name;
}

KpiTrace read_trace(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("trace not found: " + path);
  return read_kpi_jsonl(fs::path(path));
}

int cmd_simulate(const Globals& g, const std::string& schedule_path, bool with_truth) {
  const auto cfg = load_app(g);
  const auto schedule = schedule_for(cfg, schedule_path);
  for (const auto& w : schedule.warnings) std::cerr << "warning: " << w << '\n';
  const auto path = out_file(g, "trace.jsonl");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  StreamSummary summary;
  const auto samples = synth_samples(schedule, cfg.engine, &summary);
  write_kpi_jsonl(out, samples, with_truth);
  std::cout << "wrote " << samples.size() << " samples to " << path.string() << '\n';
  return kOk;
}

int cmd_eval_labeler(const Globals& g, const std::string& trace_path, const std::string& schedule_path) {
  const auto cfg = load_app(g);
  const auto trace = read_trace(trace_path);
  if (!trace.has_truth) {
    throw UsageError("trace " + trace_path + " carries no truth column; simulate it with --with-truth");
  }
  std::optional<ScenarioSchedule> schedule;
  if (!schedule_path.empty()) schedule = load_schedule(schedule_path, cfg.seed);
  const auto segments = segment_trace(trace.samples, schedule ? &*schedule : nullptr);
  const auto labels = label_trace(trace.samples, cfg.labeler);
  const auto rows = score_labels(trace.samples, labels, segments, cfg.labeler.smoothing_halfwidth);
  const auto path = out_file(g, "labeler_by_scenario.csv");
  std::ofstream(path, std::ios::binary | std::ios::trunc) << labeler_csv(rows);
  std::cout << labeler_csv(rows);
  return kOk;
}

int cmd_run_experiment(const Globals& g) {
  const auto app = load_app(g);
  auto cfg = ExperimentConfig::from(app);
  cfg.output_dir = g.out;
  try {
    validate(cfg);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  ExperimentReport rep;
  try {
    rep = run_experiment(cfg);
  } catch (const std::exception& e) {
    fs::create_directories(g.out);
    std::ofstream(fs::path(g.out) / "FAILED", std::ios::trunc) << e.what() << '\n';
    std::cerr << "experiment failed: " << e.what() << '\n';
    return kFailure;
  }
  fs::remove(fs::path(g.out) / "FAILED");
  write_artifacts(rep, g.out);
  std::cout << window_csv(rep.windows);
  std::printf("samples=%lld retrains=%zu deployments=%zu runtime_s=%.2f\n",
              static_cast<long long>(rep.samples), rep.transcript.retrains.size(),
              rep.transcript.deployments.size(), rep.runtime_s);
  return kOk;
}

int cmd_replay(const Globals& g, const std::string& trace_path, const std::string& model_path) {
  if (!fs::exists(model_path)) throw UsageError("model not found: " + model_path);
  MlpModel model;
  try {
    model = load_model(model_path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const auto trace = read_trace(trace_path);
  if (model.version < 1) model.version = 1;
  Detector det;
  det.swap_model(std::move(model));
  const auto path = out_file(g, "detections.csv");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << csv_header(StreamId::Detections) << '\n';
  for (const auto& s : trace.samples) out << to_csv(det.infer(observe(s))) << '\n';
  std::cout << "wrote " << trace.samples.size() << " detections to " << path.string() << '\n';
  return kOk;
}

int cmd_deploy(const std::string& model_path, const std::string& registry_path) {
  if (!fs::exists(model_path)) throw UsageError("model not found: " + model_path);
  MlpModel model;
  try {
    model = load_model(model_path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  auto registry = ModelRegistry::open(registry_path);
  const auto previous = registry.deployed();
  const auto entry = registry.add(std::move(model), TrainReport{}, 0, -1);
  registry.mark_deployed(entry.version);
  std::cout << "deployed v" << entry.version << " (previous: "
            << (previous ? "v" + std::to_string(previous->version) : std::string("none")) << ") -> "
            << entry.path << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SAJD: self-adaptive jamming detection closed loop"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "RNG seed (overrides the config)");
  app.add_option("--out", g.out, "output directory")->capture_default_str();

  std::string schedule, trace, model, registry = "models";
  bool with_truth = false;

  auto* sim = app.add_subcommand("simulate", "synthesize a KPI trace (trace.jsonl)");
  sim->add_option("--schedule", schedule, "schedule JSON (default: scenarios 1-18)");
  sim->add_flag("--with-truth", with_truth, "include the ground-truth column");

  auto* ev = app.add_subcommand("eval-labeler", "per-scenario labeler accuracy (labeler_by_scenario.csv)");
  ev->add_option("--trace", trace, "trace JSONL with truth")->required();
  ev->add_option("--schedule", schedule, "schedule the trace was generated from");

  auto* exp = app.add_subcommand("run-experiment", "closed loop vs static baseline");

  auto* rep = app.add_subcommand("replay", "offline inference over a trace (detections.csv)");
  rep->add_option("--trace", trace, "trace JSONL")->required();
  rep->add_option("--model", model, "model file")->required();

  auto* dep = app.add_subcommand("deploy", "register a model and mark it deployed");
  dep->add_option("--model", model, "model file")->required();
  dep->add_option("--registry", registry, "registry directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) return cmd_simulate(g, schedule, with_truth);
    if (*ev) return cmd_eval_labeler(g, trace, schedule);
    if (*exp) return cmd_run_experiment(g);
    if (*rep) return cmd_replay(g, trace, model);
    if (*dep) return cmd_deploy(model, registry);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
