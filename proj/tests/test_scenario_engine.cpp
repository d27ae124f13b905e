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

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "sajd/scenario_engine.hpp"

using namespace sajd;

namespace {

ScenarioSchedule only(std::initializer_list<int> ids, int duration = 300, std::uint64_t seed = 11) {
  ScenarioSchedule s;
  s.seed = seed;
  for (int id : ids) s.entries.push_back(catalog_scenario(id, duration));
  return s;
}

double mean_snr(const std::vector<KpiSample>& v, std::size_t lo, std::size_t hi) {
  double acc = 0;
  for (std::size_t i = lo; i < hi; ++i) acc += v[i].snr_db;
  return acc / static_cast<double>(hi - lo);
}

}  // namespace

TEST_CASE("catalog holds 18 scenarios with the expected levels") {
  const auto& c = scenario_catalog();
  REQUIRE(c.size() == 18);
  CHECK(c[0].jammed());
  CHECK(c[0].interference_db == -8.0);
  CHECK(c[0].noise_amplitude == 0.056);
  CHECK_FALSE(c[17].jammed());
  CHECK(c[16].interference_db == -40.0);
  CHECK(c[16].noise_amplitude == 0.33);
  for (const auto& s : c) {
    if (!s.jammed()) CHECK(s.interference_db == -100.0);
  }
}

TEST_CASE("sinr closed form") {
  const ChannelParams p;
  // Frozen values from the combining formula.
  CHECK(sinr_db(catalog_scenario(1), p) == doctest::Approx(7.915).epsilon(1e-3));
  CHECK(sinr_db(catalog_scenario(18), p) == doctest::Approx(9.63).epsilon(1e-3));
  ScenarioSpec unit{99, InterferenceEvent::Off, -100.0, 1.0, 10};
  CHECK(sinr_db(unit, p) == doctest::Approx(0.0).epsilon(1e-6));
  for (const auto& s : scenario_catalog()) {
    CHECK(sinr_db(s, p) == doctest::Approx(oracle::sinr_db(0.0, s.interference_db, s.noise_amplitude)));
    if (!s.jammed()) CHECK(std::abs(sinr_db(s, p) + 20.0 * std::log10(s.noise_amplitude)) < 0.01);
  }
}

TEST_CASE("sinr is strictly decreasing in interference power and noise amplitude") {
  const ChannelParams p;
  double prev = 1e9;
  for (double i = -60; i <= 0; i += 5) {
    const double v = sinr_db({0, InterferenceEvent::On, i, 0.15, 1}, p);
    CHECK(v < prev);
    prev = v;
  }
  prev = 1e9;
  for (double a = 0.01; a < 2.0; a *= 1.5) {
    const double v = sinr_db({0, InterferenceEvent::On, -20, a, 1}, p);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("mcs mapping clamps and is monotone") {
  const ChannelParams p;
  CHECK(mcs_for_snr(36.0 + p.la_margin_db, p) == 28);
  CHECK(mcs_for_snr(100.0, p) == 28);
  CHECK(mcs_for_snr(-20.0, p) == 0);
  CHECK(mcs_for_snr(7.92, p) == 10);
  int prev = 0;
  for (double x = -30; x < 50; x += 0.01) {
    const int m = mcs_for_snr(x, p);
    CHECK(m >= prev);
    prev = m;
  }
}

TEST_CASE("bler is the logistic in the gap to the mcs threshold") {
  const ChannelParams p;
  for (int m : {0, 10, 28}) {
    const double thr = mcs_threshold_db(m);
    CHECK(thr == doctest::Approx(-6.0 + 36.0 * m / 28.0));
    CHECK(bler_for(thr, m, p) == doctest::Approx(0.5));
    CHECK(bler_for(thr + 10, m, p) == doctest::Approx(4.54e-5).epsilon(1e-2));
    CHECK(bler_for(thr - 10, m, p) == doctest::Approx(0.99995).epsilon(1e-5));
    CHECK(bler_for(thr + 3.3, m, p) == doctest::Approx(oracle::logistic_bler(thr + 3.3, thr, 1.0)));
  }
  // Far tails stay inside [0,1] without NaN.
  CHECK(bler_for(1e6, 0, p) >= 0.0);
  CHECK(bler_for(-1e6, 0, p) <= 1.0);
}

TEST_CASE("stream shape: contiguous seq, 100 ms period, invariants hold") {
  StreamSummary sum;
  const auto v = synth_samples(only({1, 2, 3}, 50), ChannelParams{}, &sum);
  REQUIRE(v.size() == 150);
  CHECK(sum.samples_emitted == 150);
  REQUIRE(sum.segments.size() == 3);
  CHECK(sum.segments[1].first_seq == 50);
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(v[i].seq == static_cast<std::int64_t>(i));
    CHECK(v[i].ts_ms == static_cast<std::int64_t>(i) * 100);
    CHECK(kpi_violation(v[i]).empty());
  }
}

TEST_CASE("scenario 2 alone is never jammed") {
  for (const auto& s : synth_samples(only({2}), ChannelParams{})) CHECK_FALSE(s.truth_interference);
}

TEST_CASE("same seed gives identical streams; another seed differs") {
  const auto a = synth_samples(only({1, 2}), ChannelParams{});
  const auto b = synth_samples(only({1, 2}), ChannelParams{});
  const auto c = synth_samples(only({1, 2}, 300, 12), ChannelParams{});
  CHECK(a == b);
  CHECK_FALSE(a == c);
}

TEST_CASE("clean-to-jammed step lowers mean snr by about 17.1 dB") {
  const auto v = synth_samples(only({2, 1}), ChannelParams{});
  const double gap = mean_snr(v, 0, 300) - mean_snr(v, 300, 600);
  CHECK(gap == doctest::Approx(25.036 - 7.915).epsilon(0.02));
}

TEST_CASE("digest tracks the stream") {
  StreamSummary s1, s2;
  synth_samples(only({5, 6}), ChannelParams{}, &s1);
  synth_samples(only({5, 6}), ChannelParams{}, &s2);
  CHECK(s1.digest == s2.digest);
  StreamDigest d;
  for (const auto& s : synth_samples(only({5, 6}), ChannelParams{})) d.add(s);
  CHECK(d.value() == s1.digest);
}

TEST_CASE("sink failure aborts with a partial summary") {
  int seen = 0;
  try {
    synth_stream(only({1}), ChannelParams{}, [&](const KpiSample&) {
      if (++seen == 10) throw std::runtime_error("sink full");
    });
    FAIL("expected StreamAborted");
  } catch (const StreamAborted& e) {
    CHECK(e.partial().aborted);
    CHECK(e.partial().samples_emitted == 9);
  }
}

TEST_CASE("schedule parsing") {
  SUBCASE("ids 1..18 with default durations") {
    std::string text = R"({"scenarios":[)";
    for (int i = 1; i <= 18; ++i) text += "{\"id\":" + std::to_string(i) + (i < 18 ? "}," : "}");
    text += "]}";
    const auto s = parse_schedule(text, 3);
    REQUIRE(s.entries.size() == 18);
    for (int i = 0; i < 18; ++i) {
      CHECK(s.entries[i].id == i + 1);
      CHECK(s.entries[i].duration_samples == kDefaultDurationSamples);
    }
    CHECK(s.total_samples() == 5400);
    CHECK(s.warnings.empty());
  }
  SUBCASE("empty list is a validation error") {
    CHECK_THROWS_AS(parse_schedule(R"({"scenarios":[]})", 1), ValidationError);
  }
  SUBCASE("custom entry is accepted with a warning") {
    const auto s = parse_schedule(
        R"({"scenarios":[{"id":19,"event":"ON","interference_db":-30,"noise_amplitude":0.2}]})", 1);
    REQUIRE(s.entries.size() == 1);
    CHECK(s.entries[0].jammed());
    CHECK(s.warnings.size() == 1);
  }
  SUBCASE("malformed inputs") {
    CHECK_THROWS_AS(parse_schedule("{", 1), ParseError);
    CHECK_THROWS_AS(parse_schedule(R"({"scenarios":[{"id":1,"colour":3}]})", 1), ParseError);
    CHECK_THROWS_AS(parse_schedule(R"({"scenarios":[{"id":40}]})", 1), ParseError);
    CHECK_THROWS_AS(
        parse_schedule(R"({"scenarios":[{"id":20,"event":"OFF","interference_db":-30,"noise_amplitude":0.2}]})", 1),
        ValidationError);
    CHECK_THROWS_AS(
        parse_schedule(R"({"scenarios":[{"id":20,"event":"ON","interference_db":-30,"noise_amplitude":0}]})", 1),
        ValidationError);
  }
  SUBCASE("round trip through json") {
    const auto s = catalog_schedule(5, 40);
    const auto back = parse_schedule(schedule_to_json(s), 5);
    REQUIRE(back.entries.size() == s.entries.size());
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
      CHECK(back.entries[i].id == s.entries[i].id);
      CHECK(back.entries[i].duration_samples == 40);
    }
  }
}
