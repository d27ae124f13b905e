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
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "sajd/config.hpp"
#include "sajd/experiment.hpp"
#include "sajd/telemetry_store.hpp"
#include "sajd/training_manager.hpp"

using namespace sajd;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "sajd_harness_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(SAJD_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream b;
  b << in.rdbuf();
  return b.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("config defaults and overrides") {
  const auto d = parse_config("{}");
  CHECK(d.seed == 7);
  CHECK(d.labeler.window_size == 100);
  CHECK(d.loop.window_size == 200);
  CHECK(d.experiment.baseline_train_scenarios == std::vector<int>{1, 2, 3, 4, 5, 6});

  const auto c = parse_config(R"({"seed": 3, "mlp": {"hidden": [8], "epochs": 5},
      "loop": {"deploy_gate": 0.8}, "experiment": {"duration_samples": 50,
      "window_map": [{"label": "x", "scenarios": [1, 2]}]}})");
  CHECK(c.seed == 3);
  CHECK(c.mlp.dims == std::vector<int>{3, 8, 1});
  CHECK(c.loop.train.epochs == 5);
  CHECK(c.loop.deploy_gate == 0.8);
  REQUIRE(c.experiment.window_map.size() == 1);
  CHECK(c.experiment.window_map[0].scenario_ids == std::vector<int>{1, 2});

  CHECK(parse_config(config_to_json(c)).mlp.dims == c.mlp.dims);
  CHECK_THROWS_AS(parse_config("{"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({"labeler": {"windw_size": 3}})"), SchemaError);
  CHECK_THROWS_AS(parse_config(R"({"gpu": true})"), SchemaError);
  CHECK_THROWS_AS(parse_config(R"({"labeler": {"window_size": 2}})"), ValidationError);
}

TEST_CASE("default window map pairs entries pass by pass") {
  const auto one = default_window_map(catalog_schedule(1));
  REQUIRE(one.size() == 9);
  CHECK(one.front().label == "1a");
  CHECK(one[5].label == "1f");
  CHECK(one[6].label == "2a");
  CHECK(one.back().label == "2c");
  CHECK(one[1].scenario_ids == std::vector<int>{3, 4});

  auto twice = catalog_schedule(1);
  const auto copy = twice.entries;
  twice.entries.insert(twice.entries.end(), copy.begin(), copy.end());
  const auto two = default_window_map(twice);
  REQUIRE(two.size() == 18);
  CHECK(two[11].label == "2f");
  CHECK(two.back().label == "3f");
}

TEST_CASE("window map must cover the schedule exactly once, in order") {
  ScenarioSchedule s;
  s.entries = {catalog_scenario(1), catalog_scenario(2), catalog_scenario(3)};
  CHECK(resolve_windows(s, {{"a", {1, 2}}, {"b", {3}}}).size() == 2);
  CHECK_THROWS_AS(resolve_windows(s, {{"a", {1, 2}}}), ValidationError);
  CHECK_THROWS_AS(resolve_windows(s, {{"a", {1, 3}}, {"b", {2}}}), ValidationError);
  CHECK_THROWS_AS(resolve_windows(s, {{"a", {1, 2}}, {"b", {3}}, {"c", {1}}}), ValidationError);

  ExperimentConfig cfg;
  cfg.schedule = s;
  cfg.baseline_train_scenarios = {1, 2};
  cfg.window_map = {{"a", {1, 2}}};
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg.window_map = {};
  cfg.baseline_train_scenarios = {9};
  CHECK_THROWS_AS(validate(cfg), ValidationError);
}

TEST_CASE("labeler scoring") {
  // Ten samples: OFF x5 then ON x5; labels wrong only at the boundary.
  std::vector<KpiSample> trace;
  std::vector<LabelRecord> labels;
  for (int i = 0; i < 10; ++i) {
    trace.push_back({i, i * 100, 20, 10, 0.1, i >= 5});
    const bool says_jam = i >= 6;  // seq 5 mislabeled
    labels.push_back({i, says_jam ? Label::Interference : Label::Clean, 0.9, LabelSource::Labeler});
  }
  const auto segs = segment_trace(trace, nullptr);
  REQUIRE(segs.size() == 2);
  const auto rows = score_labels(trace, labels, segs, 2);
  CHECK(rows[0].raw_acc == 1.0);
  CHECK(rows[1].raw_acc == doctest::Approx(0.8));
  CHECK(rows[1].transition_excluded_acc == 1.0);
  CHECK(rows[0].excluded == 2);
  CHECK(rows[1].excluded == 2);
  for (const auto& r : rows) CHECK(r.transition_excluded_acc >= r.raw_acc);

  ScenarioSchedule s;
  s.entries = {catalog_scenario(2, 4)};
  CHECK_THROWS_AS(segment_trace(trace, &s), ValidationError);
  CHECK(labeler_csv(rows).rfind(kLabelerCsvHeader, 0) == 0);
}

TEST_CASE("experiment on a short schedule") {
  AppConfig app;
  app.experiment.duration_samples = 150;
  auto cfg = ExperimentConfig::from(app);
  const auto rep = run_experiment(cfg);
  CHECK(rep.samples == 18 * 150);
  CHECK(rep.digest_baseline == rep.digest_sajd);
  std::int64_t total = 0;
  for (const auto& w : rep.windows) {
    total += w.count;
    CHECK(w.baseline_acc >= 0.0);
    CHECK(w.baseline_acc <= 1.0);
    CHECK(w.baseline_scored == w.count);
  }
  CHECK(total == rep.samples);
  CHECK(rep.labeler.size() == 18);
  const auto again = run_experiment(cfg);
  CHECK(window_csv(again.windows) == window_csv(rep.windows));
  CHECK(again.transcript.lines == rep.transcript.lines);
}

TEST_CASE("cli: simulate") {
  const auto dir = scratch("simulate");
  CHECK(cli("--seed 5 --out " + (dir / "a").string() + " simulate --with-truth", dir / "log") == 0);
  CHECK(cli("--seed 5 --out " + (dir / "b").string() + " simulate --with-truth", dir / "log") == 0);
  const auto a = lines(dir / "a" / "trace.jsonl");
  CHECK(a.size() == 5400);
  CHECK(a.front().find("\"truth\"") != std::string::npos);
  CHECK(slurp(dir / "a" / "trace.jsonl") == slurp(dir / "b" / "trace.jsonl"));

  write(dir / "bad.json", R"({"scenarios": [{"id": 1, "power": 3}]})");
  CHECK(cli("--out " + dir.string() + " simulate --schedule " + (dir / "bad.json").string(), dir / "log") == 2);
  CHECK(slurp(dir / "log").find("power") != std::string::npos);
  CHECK(cli("frobnicate", dir / "log") == 2);
}

TEST_CASE("cli: eval-labeler") {
  const auto dir = scratch("eval");
  REQUIRE(cli("--seed 5 --out " + dir.string() + " simulate --with-truth", dir / "log") == 0);
  CHECK(cli("--out " + dir.string() + " eval-labeler --trace " + (dir / "trace.jsonl").string(), dir / "log") == 0);
  // Adjacent scenarios with equal truth merge without a schedule; with one, 18 rows.
  std::string sched = R"({"scenarios":[)";
  for (int i = 1; i <= 18; ++i) sched += "{\"id\":" + std::to_string(i) + (i < 18 ? "}," : "}");
  write(dir / "s.json", sched + "]}");
  CHECK(cli("--out " + dir.string() + " eval-labeler --trace " + (dir / "trace.jsonl").string() + " --schedule " +
                (dir / "s.json").string(),
            dir / "log") == 0);
  const auto rows = lines(dir / "labeler_by_scenario.csv");
  REQUIRE(rows.size() == 19);
  CHECK(rows[0] == kLabelerCsvHeader);

  write(dir / "one.json", R"({"scenarios":[{"id":2}]})");
  REQUIRE(cli("--out " + (dir / "one").string() + " simulate --with-truth --schedule " + (dir / "one.json").string(),
              dir / "log") == 0);
  REQUIRE(cli("--out " + (dir / "one").string() + " eval-labeler --trace " + (dir / "one" / "trace.jsonl").string(),
              dir / "log") == 0);
  CHECK(lines(dir / "one" / "labeler_by_scenario.csv").size() == 2);

  REQUIRE(cli("--out " + (dir / "bare").string() + " simulate", dir / "log") == 0);
  CHECK(cli("--out " + dir.string() + " eval-labeler --trace " + (dir / "bare" / "trace.jsonl").string(), dir / "log") != 0);
  CHECK(slurp(dir / "log").find("truth") != std::string::npos);
}

TEST_CASE("cli: run-experiment validates and is deterministic") {
  const auto dir = scratch("experiment");
  write(dir / "small.json", R"({"experiment": {"duration_samples": 120}})");
  const std::string base = "--config " + (dir / "small.json").string() + " --seed 9 --out ";
  REQUIRE(cli(base + (dir / "r1").string() + " run-experiment", dir / "log") == 0);
  REQUIRE(cli(base + (dir / "r2").string() + " run-experiment", dir / "log") == 0);
  for (const char* f : {"accuracy_by_window.csv", "accuracy_by_window.dat", "labeler_by_scenario.csv", "transcript.jsonl"}) {
    CHECK(slurp(dir / "r1" / f) == slurp(dir / "r2" / f));
  }
  CHECK(lines(dir / "r1" / "accuracy_by_window.csv").front() == kWindowCsvHeader);
  CHECK(fs::exists(dir / "r1" / "summary.json"));
  CHECK(fs::exists(dir / "r1" / "plot_accuracy.gp"));
  CHECK(fs::exists(dir / "r1" / "models" / "registry.jsonl"));

  write(dir / "gap.json",
        R"({"experiment": {"window_map": [{"label": "1a", "scenarios": [1, 2]}]}})");
  CHECK(cli("--config " + (dir / "gap.json").string() + " --out " + (dir / "r3").string() + " run-experiment",
            dir / "log") == 2);
}

TEST_CASE("cli: replay matches the loop's first-model detections") {
  const auto dir = scratch("replay");
  REQUIRE(cli("--seed 4 --out " + dir.string() + " simulate --with-truth", dir / "log") == 0);
  const auto trace = read_kpi_jsonl(dir / "trace.jsonl");

  TelemetryStore st;
  Detector det;
  ModelRegistry reg(dir / "models");
  ClosedLoop loop(st, det, LabelerConfig{}, reg, LoopConfig{});
  for (const auto& k : trace.samples) loop.on_sample(observe(k));
  loop.finish();
  REQUIRE(fs::exists(dir / "models" / "v001.model"));

  REQUIRE(cli("--out " + dir.string() + " replay --trace " + (dir / "trace.jsonl").string() + " --model " +
                  (dir / "models" / "v001.model").string(),
              dir / "log") == 0);
  TelemetryStore replayed;
  replayed.import_stream(dir / "detections.csv", Format::Csv);
  std::map<std::int64_t, DetectionRecord> by_seq;
  for (const auto& d : replayed.detections().all()) by_seq[d.seq] = d;
  CHECK(by_seq.size() == trace.samples.size());
  int compared = 0;
  for (const auto& d : st.detections().all()) {
    if (d.model_version != 1) continue;
    ++compared;
    CHECK(by_seq.at(d.seq).prob == d.prob);
    CHECK(by_seq.at(d.seq).verdict == d.verdict);
  }
  CHECK(compared > 0);

  CHECK(cli("--out " + dir.string() + " replay --trace " + (dir / "trace.jsonl").string() + " --model " +
                (dir / "nope.model").string(),
            dir / "log") == 2);
  write(dir / "empty.jsonl", "");
  REQUIRE(cli("--out " + (dir / "e").string() + " replay --trace " + (dir / "empty.jsonl").string() + " --model " +
                  (dir / "models" / "v001.model").string(),
              dir / "log") == 0);
  const auto empty = lines(dir / "e" / "detections.csv");
  REQUIRE(empty.size() == 1);
  CHECK(empty[0] == csv_header(StreamId::Detections));
}

TEST_CASE("cli: deploy assigns the next registry version") {
  const auto dir = scratch("deploy");
  auto m = init_model(3);
  save_model(m, dir / "candidate.model");
  const std::string args = "deploy --model " + (dir / "candidate.model").string() + " --registry " + (dir / "reg").string();
  REQUIRE(cli(args, dir / "log") == 0);
  REQUIRE(cli(args, dir / "log") == 0);
  const auto reg = ModelRegistry::open(dir / "reg");
  REQUIRE(reg.entries().size() == 2);
  CHECK(reg.deployed()->version == 2);
  CHECK(slurp(dir / "log").find("v2") != std::string::npos);
}
