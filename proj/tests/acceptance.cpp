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
// Acceptance checks. `acceptance N` runs criterion N and prints one line:
//   c<N> PASS|FAIL: <measured values>
// Exit status is 0 on PASS, 1 on FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "oracles.hpp"
#include "sajd/experiment.hpp"
#include "sajd/labeler.hpp"
#include "sajd/mlp.hpp"
#include "sajd/scenario_engine.hpp"
#include "sajd/telemetry_store.hpp"
#include "sajd/training_manager.hpp"
#include "swap_race.hpp"

using namespace sajd;
namespace fs = std::filesystem;

namespace {

struct Verdict_ {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string f3(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3f", v);
  return b;
}

// --- 1: closed loop vs static baseline over the default experiment ---------
Verdict_ c1() {
  Verdict_ v;
  const auto t0 = Clock::now();
  AppConfig app;  // defaults: scenarios 1-18, 300 samples each, baseline on 1-6
  const auto cfg = ExperimentConfig::from(app);
  const auto rep = run_experiment(cfg);
  const double runtime = seconds_since(t0);

  // Scenario classes the baseline saw: ON interference levels and noise amplitudes.
  std::set<double> seen_int, seen_noise;
  for (int id : cfg.baseline_train_scenarios) {
    const auto s = catalog_scenario(id);
    if (s.jammed()) seen_int.insert(s.interference_db);
    seen_noise.insert(s.noise_amplitude);
  }
  auto unseen = [&](int id) {
    const auto s = catalog_scenario(id);
    return (s.jammed() && !seen_int.count(s.interference_db)) || !seen_noise.count(s.noise_amplitude);
  };

  const std::int64_t live = rep.first_deployment_seq.value_or(INT64_MAX);
  double sajd_min = 1.0, base_min_unseen = 1.0;
  std::string sajd_worst, base_worst;
  v.detail << "windows";
  for (const auto& w : rep.windows) {
    v.detail << ' ' << w.label << '=' << f3(w.sajd_acc) << '/' << f3(w.baseline_acc);
    if (w.first_seq >= live && !(w.sajd_acc >= sajd_min)) sajd_min = w.sajd_acc, sajd_worst = w.label;
    bool has_unseen = false;
    for (int id : w.scenario_ids) has_unseen = has_unseen || unseen(id);
    if (has_unseen && w.baseline_acc < base_min_unseen) base_min_unseen = w.baseline_acc, base_worst = w.label;
  }
  v.detail << " (sajd/baseline); first_deploy_seq=" << live << " sajd_min_after_deploy=" << f3(sajd_min)
           << (sajd_worst.empty() ? "" : " @" + sajd_worst) << " baseline_min_unseen=" << f3(base_min_unseen)
           << (base_worst.empty() ? "" : " @" + base_worst) << " runtime_s=" << f3(runtime);
  v.require(rep.first_deployment_seq.has_value(), "SAJD never deployed");
  v.require(sajd_min >= 0.90, "SAJD >= 0.90 on every window after first deployment");
  v.require(base_min_unseen < 0.70, "baseline < 0.70 on some unseen-class window");
  v.require(runtime <= 180.0, "runtime <= 3 min");
  return v;
}

// --- 2: labeler per-scenario accuracy --------------------------------------
Verdict_ c2() {
  Verdict_ v;
  const auto t0 = Clock::now();
  const auto schedule = catalog_schedule(7);
  const auto trace = synth_samples(schedule, ChannelParams{});
  const auto labels = label_trace(trace, LabelerConfig{});
  const auto rows = score_labels(trace, labels, segment_trace(trace, &schedule), 2);
  const double runtime = seconds_since(t0);
  double raw_min = 1.0, ex_min = 1.0;
  int raw_bad = 0, ex_bad = 0;
  v.detail << "scenario raw/excl:";
  for (const auto& r : rows) {
    v.detail << ' ' << r.scenario_id << '=' << f3(r.raw_acc) << '/' << f3(r.transition_excluded_acc);
    raw_min = std::min(raw_min, r.raw_acc);
    ex_min = std::min(ex_min, r.transition_excluded_acc);
    raw_bad += !(r.raw_acc >= 0.93);
    ex_bad += !(r.transition_excluded_acc >= 0.97);
  }
  v.detail << "; min raw=" << f3(raw_min) << " (" << raw_bad << "/18 below 0.93), min excl=" << f3(ex_min) << " ("
           << ex_bad << "/18 below 0.97), runtime_s=" << f3(runtime);
  v.require(rows.size() == 18, "18 scenarios");
  v.require(ex_bad == 0, "transition-excluded >= 0.97 on all scenarios");
  v.require(raw_bad == 0, "raw >= 0.93 on all scenarios");
  v.require(runtime <= 30.0, "runtime <= 30 s");
  return v;
}

// --- 3: drift responsiveness, read back from the transcript file ------------
Verdict_ c3() {
  Verdict_ v;
  ScenarioSchedule s;
  s.seed = 7;
  // Model learns 25 dB clean vs 7.9 dB jammed; scenario 7 (18.8 dB, jammed) is new.
  for (int id : {2, 1, 2, 1}) s.entries.push_back(catalog_scenario(id, 300));
  s.entries.push_back(catalog_scenario(7, 900));
  const std::int64_t transition = 1200;
  const auto samples = synth_samples(s, ChannelParams{});

  TelemetryStore st;
  Detector det;
  ModelRegistry reg;
  ClosedLoop loop(st, det, LabelerConfig{}, reg, LoopConfig{});
  for (const auto& k : samples) loop.on_sample(observe(k));
  loop.finish();
  const auto path = fs::temp_directory_path() / "sajd_acceptance_c3.jsonl";
  loop.transcript().write_jsonl(path);

  std::ifstream in(path);
  std::string line;
  std::optional<std::int64_t> drift_at;
  int retrains = 0, deploys = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    const auto ev = j.at("event").get<std::string>();
    const auto at = j.at("at_seq").get<std::int64_t>();
    if (ev == "monitor" && !drift_at && at >= transition && j.at("drifted").get<bool>() &&
        j.at("trigger_reason") == "LOW_AGREEMENT") {
      drift_at = at;
    }
    if (drift_at && at >= *drift_at) {
      retrains += ev == "retrain";
      deploys += ev == "deploy" && j.at("deployed").get<bool>();
    }
  }
  const std::int64_t delay = drift_at ? *drift_at - transition : -1;
  v.detail << "transition_seq=" << transition << " drift_report_seq=" << (drift_at ? std::to_string(*drift_at) : "none")
           << " delay=" << delay << " retrains_after=" << retrains << " deployments_after=" << deploys;
  v.require(drift_at.has_value(), "drifted=true report after the transition");
  v.require(delay >= 0 && delay <= 400, "drift within 400 samples");
  v.require(retrains == 1, "exactly one retrain");
  v.require(deploys == 1, "exactly one deployment");
  return v;
}

// --- 4: zero-downtime swap ---------------------------------------------------
Verdict_ c4() {
  Verdict_ v;
  const auto r = race::run(100000, 120);
  v.detail << "samples=" << r.samples << " detections=" << r.detections << " swaps=" << r.swaps
           << " version_regressions=" << r.version_regressions << " prob_version_mismatches=" << r.mismatches
           << " poison_observed=" << r.poison_seen << " seq_gaps=" << r.seq_gaps;
  v.require(r.swaps >= 100, ">= 100 swaps");
  v.require(r.detections == r.samples, "detections == samples");
  v.require(r.version_regressions == 0 && r.seq_gaps == 0, "monotone versions");
  v.require(r.mismatches == 0 && r.poison_seen == 0, "no mixed records");
  return v;
}

// --- 5: numerical core -------------------------------------------------------
bool near_kink(const MlpModel& m, const std::vector<Example>& batch, double eps) {
  for (const auto& e : batch) {
    const auto x0 = normalize(m, e.x);
    std::vector<double> a(x0.begin(), x0.end());
    for (const auto& L : m.layers) {
      std::vector<double> z(L.out);
      for (int o = 0; o < L.out; ++o) {
        z[o] = L.biases[o];
        for (int i = 0; i < L.in; ++i) z[o] += L.weights[o * L.in + i] * a[i];
        if (L.activation == Activation::Relu && std::abs(z[o]) < eps) return true;
        if (L.activation == Activation::Relu) z[o] = std::max(0.0, z[o]);
      }
      a = z;
    }
  }
  return false;
}

Verdict_ c5() {
  Verdict_ v;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> snr(-10.0, 40.0), u(0.0, 1.0);
  auto batch_of = [&](int n) {
    std::vector<Example> b;
    for (int i = 0; i < n; ++i) b.push_back({{snr(rng), u(rng), std::floor(u(rng) * 29)}, u(rng) < 0.5, 0.5 + u(rng)});
    return b;
  };

  double worst = 0.0;
  int draws = 0, skipped = 0;
  while (draws < 100) {
    auto m = init_model(rng());
    for (auto& L : m.layers)
      for (auto& b : L.biases) b = 0.1 * (u(rng) - 0.5);
    const auto batch = batch_of(8);
    if (near_kink(m, batch, 1e-3)) {
      ++skipped;
      continue;
    }
    ++draws;
    const auto g = loss_and_grad(m, batch).grad;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      auto check = [&](double* p, double analytic) {
        const double num = oracle::central_diff([&] { return loss_and_grad(m, batch).loss; }, p, 1e-5);
        worst = std::max(worst, std::abs(analytic - num) / std::max({std::abs(analytic), std::abs(num), 1e-6}));
      };
      for (std::size_t i = 0; i < m.layers[l].weights.size(); ++i) check(&m.layers[l].weights[i], g.weights[l][i]);
      for (std::size_t i = 0; i < m.layers[l].biases.size(); ++i) check(&m.layers[l].biases[i], g.biases[l][i]);
    }
  }

  const double bce_gap = std::abs(loss_and_grad(zero_model(), batch_of(64)).loss - std::log(2.0));

  auto m = init_model(5);
  m.version = 1;
  const auto path = fs::temp_directory_path() / "sajd_acceptance_c5.model";
  save_model(m, path);
  const auto back = load_model(path);
  double rt = 0.0;
  for (const auto& e : batch_of(100)) rt = std::max(rt, std::abs(forward(back, e.x) - forward(m, e.x)));

  std::normal_distribution<double> jit(0.0, 0.5);
  std::vector<Example> sep;
  for (int i = 0; i < 1000; ++i) {
    const bool jam = i % 2;
    sep.push_back({{(jam ? 8.0 : 18.0) + jit(rng), jam ? 0.2 : 0.01, jam ? 8.0 : 16.0}, jam, 1.0});
  }
  const double val = train(sep, TrainConfig{}).report.val_accuracy;

  v.detail << "grad_max_rel_err=" << worst << " (100 draws, " << skipped << " kink-adjacent redrawn)"
           << " |bce(0.5)-ln2|=" << bce_gap << " roundtrip_max_diff=" << rt << " separable_val_acc=" << f3(val);
  v.require(worst < 1e-4, "gradient check");
  v.require(bce_gap <= 1e-9, "BCE at 0.5 == ln 2");
  v.require(rt <= 1e-12, "save/load round trip");
  v.require(val >= 0.99, "separable validation accuracy");
  return v;
}

// --- 6: engine statistics ----------------------------------------------------
Verdict_ c6() {
  Verdict_ v;
  const ChannelParams p;
  double worst_mean = 0.0, worst_off = 0.0;
  for (const auto& spec : scenario_catalog()) {
    ScenarioSchedule s;
    s.seed = 100 + spec.id;
    auto e = spec;
    e.duration_samples = 10000;
    s.entries = {e};
    double mean = 0.0;
    for (const auto& k : synth_samples(s, p)) mean += k.snr_db;
    mean /= 10000.0;
    worst_mean = std::max(worst_mean, std::abs(mean - sinr_db(spec, p)));
    if (!spec.jammed()) {
      worst_off = std::max(worst_off, std::abs(sinr_db(spec, p) - (p.signal_power_db - 20.0 * std::log10(spec.noise_amplitude))));
    }
  }

  // BLER spike: each ON scenario at >= -20 dB entered from its same-noise OFF partner.
  int spikes = 0, transitions = 0;
  std::ostringstream spike_detail;
  for (const auto& on : scenario_catalog()) {
    if (!on.jammed() || on.interference_db < -20.0) continue;
    const int off_id = on.id + 1;  // catalog pairs ON n with OFF n+1 at the same noise
    ScenarioSchedule s;
    s.seed = 500 + on.id;
    s.entries = {catalog_scenario(off_id), catalog_scenario(on.id)};
    const auto v2 = synth_samples(s, p);
    double before = 0.0, after = 0.0;
    for (int i = 290; i < 300; ++i) before += v2[i].bler / 10.0;
    for (int i = 300; i < 310; ++i) after += v2[i].bler / 10.0;
    ++transitions;
    spikes += after > before;
    spike_detail << ' ' << off_id << "->" << on.id << '=' << f3(before) << "->" << f3(after);
  }
  v.detail << "max|mean-sinr|=" << f3(worst_mean) << "dB max|off-closed_form|=" << worst_off
           << "dB bler_spikes=" << spikes << '/' << transitions << ':' << spike_detail.str();
  v.require(worst_mean < 0.2, "per-scenario mean within 0.2 dB");
  v.require(worst_off < 0.01, "OFF within 0.01 dB of closed form");
  v.require(spikes == transitions, "BLER spike at every OFF->ON transition >= -20 dB");
  return v;
}

// --- 7: determinism of run-experiment through the CLI ------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream b;
  b << in.rdbuf();
  return b.str();
}

Verdict_ c7() {
  Verdict_ v;
  const auto root = fs::temp_directory_path() / "sajd_acceptance_c7";
  fs::remove_all(root);
  int rc[2];
  for (int i = 0; i < 2; ++i) {
    const auto out = root / ("run" + std::to_string(i));
    const std::string cmd = std::string(SAJD_CLI) + " --seed 7 --out " + out.string() + " run-experiment > " +
                            (root / ("log" + std::to_string(i))).string() + " 2>&1";
    fs::create_directories(root);
    rc[i] = std::system(cmd.c_str());
  }
  int identical = 0, compared = 0;
  for (const char* name : {"accuracy_by_window.csv", "accuracy_by_window.dat", "labeler_by_scenario.csv"}) {
    const auto a = root / "run0" / name, b = root / "run1" / name;
    ++compared;
    identical += fs::exists(a) && fs::exists(b) && slurp(a) == slurp(b) && !slurp(a).empty();
  }
  v.detail << "exit_codes=" << rc[0] << ',' << rc[1] << " identical_csv_artifacts=" << identical << '/' << compared;
  v.require(rc[0] == 0 && rc[1] == 0, "both runs succeed");
  v.require(identical == compared, "byte-identical CSV artifacts");
  return v;
}

// --- 8: 2-means vs exhaustive oracle -----------------------------------------
Verdict_ c8() {
  Verdict_ v;
  std::mt19937_64 rng(88);
  std::uniform_int_distribution<int> size(2, 12);
  std::uniform_real_distribution<double> level(-5.0, 30.0), u(0.0, 1.0);
  std::normal_distribution<double> jit(0.0, 0.5);
  int matched = 0;
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    // KPI-like window: samples from one or two (snr, bler) regimes.
    const int n = size(rng);
    const double a = level(rng), b = level(rng);
    std::vector<oracle::P2> raw;
    for (int i = 0; i < n; ++i) {
      const bool second = u(rng) < 0.5;
      raw.push_back({(second ? b : a) + jit(rng), std::clamp((second ? 0.3 : 0.05) + 0.05 * jit(rng), 0.0, 1.0)});
    }
    const auto std_pts = oracle::standardize(raw);
    std::vector<kernels::Point2> pts;
    for (const auto& p : std_pts) pts.push_back({p.x, p.y});
    const auto r = two_means(pts, LabelerConfig{}.exact_search_limit);
    const double best = oracle::brute_force_two_means(std_pts);
    const double gap = r.wcss - best;
    worst = std::max(worst, gap);
    matched += gap <= 1e-9 * std::max(1.0, best);
  }
  v.detail << "windows=200 matched_bruteforce_min=" << matched << " max_excess_wcss=" << worst;
  v.require(matched == 200, "every window attains the brute-force minimum");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Verdict_()>> criteria{{1, c1}, {2, c2}, {3, c3}, {4, c4},
                                                          {5, c5}, {6, c6}, {7, c7}, {8, c8}};
  if (argc != 2 || !criteria.count(std::atoi(argv[1]))) {
    std::fprintf(stderr, "usage: acceptance <1-8>\n");
    return 2;
  }
  const int n = std::atoi(argv[1]);
  Verdict_ v;
  try {
    v = criteria.at(n)();
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail << "exception: " << e.what();
  }
  std::printf("c%d %s: %s\n", n, v.pass ? "PASS" : "FAIL", v.detail.str().c_str());
  return v.pass ? 0 : 1;
}
