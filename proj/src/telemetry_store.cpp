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
#include "sajd/telemetry_store.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sajd {

namespace {

using nlohmann::json;

constexpr std::string_view kKpiHeaderTruth = "seq,ts_ms,snr_db,mcs,bler,truth";
constexpr std::string_view kKpiHeader = "seq,ts_ms,snr_db,mcs,bler";
constexpr std::string_view kLabelHeader = "seq,label,confidence,source";
constexpr std::string_view kDetectionHeader = "seq,prob,verdict,model_version,latency_us";

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

template <class T>
T parse_number(std::string_view field, const char* what, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " '" +
                     std::string(field) + "'");
  }
  return value;
}

void check_columns(std::string_view header, std::string_view expected) {
  auto got = split_csv(header);
  auto want = split_csv(expected);
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (i >= want.size() || got[i] != want[i]) {
      throw SchemaError("unknown or misplaced column '" + std::string(got[i]) + "'");
    }
  }
  if (got.size() != want.size()) {
    throw SchemaError("missing column '" + std::string(want[got.size()]) + "'");
  }
}

void require_keys(const json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional, std::size_t line_no) {
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (auto k : required) known = known || key == k;
    for (auto k : optional) known = known || key == k;
    if (!known) {
      throw SchemaError("line " + std::to_string(line_no) + ": unknown field '" + key + "'");
    }
  }
  for (auto k : required) {
    if (!j.contains(k)) {
      throw SchemaError("line " + std::to_string(line_no) + ": missing field '" + k + "'");
    }
  }
}

KpiSample kpi_from_json(const json& j, std::size_t line_no, bool* has_truth) {
  require_keys(j, {"seq", "ts_ms", "snr_db", "mcs", "bler"}, {"truth"}, line_no);
  KpiSample s;
  s.seq = j.at("seq").get<std::int64_t>();
  s.ts_ms = j.at("ts_ms").get<std::int64_t>();
  s.snr_db = j.at("snr_db").get<double>();
  s.mcs = j.at("mcs").get<int>();
  s.bler = j.at("bler").get<double>();
  if (j.contains("truth")) {
    s.truth_interference = j.at("truth").get<bool>();
    if (has_truth) *has_truth = true;
  }
  return s;
}

LabelRecord label_from_json(const json& j, std::size_t line_no) {
  require_keys(j, {"seq", "label", "confidence", "source"}, {}, line_no);
  LabelRecord r;
  r.seq = j.at("seq").get<std::int64_t>();
  auto label = parse_label(j.at("label").get<std::string>());
  auto source = parse_label_source(j.at("source").get<std::string>());
  if (!label || !source) {
    throw ParseError("line " + std::to_string(line_no) + ": bad label or source value");
  }
  r.label = *label;
  r.confidence = j.at("confidence").get<double>();
  r.source = *source;
  return r;
}

DetectionRecord detection_from_json(const json& j, std::size_t line_no) {
  require_keys(j, {"seq", "prob", "verdict", "model_version", "latency_us"}, {}, line_no);
  DetectionRecord r;
  r.seq = j.at("seq").get<std::int64_t>();
  r.prob = j.at("prob").get<double>();
  auto v = parse_verdict(j.at("verdict").get<std::string>());
  if (!v) throw ParseError("line " + std::to_string(line_no) + ": bad verdict value");
  r.verdict = *v;
  r.model_version = j.at("model_version").get<std::int64_t>();
  r.latency_us = j.at("latency_us").get<std::int64_t>();
  return r;
}

StreamId infer_from_keys(const json& j, std::size_t line_no) {
  if (j.contains("snr_db")) return StreamId::Kpi;
  if (j.contains("label")) return StreamId::Labels;
  if (j.contains("verdict")) return StreamId::Detections;
  throw SchemaError("line " + std::to_string(line_no) + ": cannot tell which stream this record belongs to");
}

template <class F>
void for_each_line(std::istream& in, F&& f) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim_cr(line);
    if (view.empty()) continue;
    f(view, line_no);
  }
}

}  // namespace

std::string_view stream_name(StreamId id) {
  switch (id) {
    case StreamId::Kpi:
      return "kpi";
    case StreamId::Labels:
      return "labels";
    case StreamId::Detections:
      return "detections";
  }
  return "?";
}

StreamId parse_stream_id(std::string_view name) {
  if (name == "kpi") return StreamId::Kpi;
  if (name == "labels") return StreamId::Labels;
  if (name == "detections") return StreamId::Detections;
  throw UnknownStream("unknown stream '" + std::string(name) + "'");
}

std::string violation(const KpiSample& r) { return kpi_violation(r); }
std::string violation(const LabelRecord& r) { return label_violation(r); }
std::string violation(const DetectionRecord& r) { return detection_violation(r); }

TelemetryStore::TelemetryStore(std::size_t max_records)
    : kpi_("kpi", max_records),
      labels_("labels", max_records),
      detections_("detections", max_records) {}

std::size_t TelemetryStore::count(StreamId id) const {
  switch (id) {
    case StreamId::Kpi:
      return kpi_.size();
    case StreamId::Labels:
      return labels_.size();
    case StreamId::Detections:
      return detections_.size();
  }
  return 0;
}

namespace {

template <class Left>
std::vector<std::pair<Left, LabelRecord>> merge_join(const std::vector<Left>& left,
                                                     const std::vector<LabelRecord>& labels) {
  std::vector<std::pair<Left, LabelRecord>> out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < left.size() && j < labels.size()) {
    if (left[i].seq < labels[j].seq) {
      ++i;
    } else if (labels[j].seq < left[i].seq) {
      ++j;
    } else {
      if (labels[j].label != Label::Unlabeled) out.emplace_back(left[i], labels[j]);
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

std::vector<std::pair<KpiSample, LabelRecord>> TelemetryStore::join_labels(
    std::int64_t from_seq, std::int64_t to_seq) const {
  if (from_seq > to_seq) return {};
  return merge_join(kpi_.window(from_seq, to_seq), labels_.window(from_seq, to_seq));
}

std::vector<std::pair<DetectionRecord, LabelRecord>> TelemetryStore::join_detections(
    std::int64_t from_seq, std::int64_t to_seq) const {
  if (from_seq > to_seq) return {};
  return merge_join(detections_.window(from_seq, to_seq), labels_.window(from_seq, to_seq));
}

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string to_jsonl(const KpiSample& s, bool with_truth) {
  std::string out = "{\"seq\":" + std::to_string(s.seq) + ",\"ts_ms\":" + std::to_string(s.ts_ms) +
                    ",\"snr_db\":" + format_real(s.snr_db) + ",\"mcs\":" + std::to_string(s.mcs) +
                    ",\"bler\":" + format_real(s.bler);
  if (with_truth) out += s.truth_interference ? ",\"truth\":true" : ",\"truth\":false";
  out += '}';
  return out;
}

std::string to_jsonl(const LabelRecord& r) {
  return "{\"seq\":" + std::to_string(r.seq) + ",\"label\":\"" + std::string(to_string(r.label)) +
         "\",\"confidence\":" + format_real(r.confidence) + ",\"source\":\"" +
         std::string(to_string(r.source)) + "\"}";
}

std::string to_jsonl(const DetectionRecord& r) {
  return "{\"seq\":" + std::to_string(r.seq) + ",\"prob\":" + format_real(r.prob) +
         ",\"verdict\":\"" + std::string(to_string(r.verdict)) +
         "\",\"model_version\":" + std::to_string(r.model_version) +
         ",\"latency_us\":" + std::to_string(r.latency_us) + "}";
}

std::string to_csv(const KpiSample& s, bool with_truth) {
  std::string out = std::to_string(s.seq) + ',' + std::to_string(s.ts_ms) + ',' +
                    format_real(s.snr_db) + ',' + std::to_string(s.mcs) + ',' + format_real(s.bler);
  if (with_truth) out += s.truth_interference ? ",1" : ",0";
  return out;
}

std::string to_csv(const LabelRecord& r) {
  return std::to_string(r.seq) + ',' + std::string(to_string(r.label)) + ',' +
         format_real(r.confidence) + ',' + std::string(to_string(r.source));
}

std::string to_csv(const DetectionRecord& r) {
  return std::to_string(r.seq) + ',' + format_real(r.prob) + ',' +
         std::string(to_string(r.verdict)) + ',' + std::to_string(r.model_version) + ',' +
         std::to_string(r.latency_us);
}

std::string_view csv_header(StreamId id, bool with_truth) {
  switch (id) {
    case StreamId::Kpi:
      return with_truth ? kKpiHeaderTruth : kKpiHeader;
    case StreamId::Labels:
      return kLabelHeader;
    case StreamId::Detections:
      return kDetectionHeader;
  }
  return {};
}

std::size_t TelemetryStore::export_stream(StreamId id, const std::filesystem::path& path,
                                          Format format, bool with_truth) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  if (format == Format::Csv) out << csv_header(id, with_truth) << '\n';

  auto write_all = [&](const auto& records, auto&& line) {
    for (const auto& r : records) out << line(r) << '\n';
    return records.size();
  };

  std::size_t n = 0;
  switch (id) {
    case StreamId::Kpi:
      n = write_all(kpi_.all(), [&](const KpiSample& s) {
        return format == Format::Csv ? to_csv(s, with_truth) : to_jsonl(s, with_truth);
      });
      break;
    case StreamId::Labels:
      n = write_all(labels_.all(), [&](const LabelRecord& r) {
        return format == Format::Csv ? to_csv(r) : to_jsonl(r);
      });
      break;
    case StreamId::Detections:
      n = write_all(detections_.all(), [&](const DetectionRecord& r) {
        return format == Format::Csv ? to_csv(r) : to_jsonl(r);
      });
      break;
  }
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
  return n;
}

StreamId TelemetryStore::import_stream(const std::filesystem::path& path, Format format,
                                       std::optional<StreamId> expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  if (format == Format::Csv) {
    std::string header;
    if (!std::getline(in, header)) throw SchemaError(path.string() + ": missing CSV header");
    auto h = trim_cr(header);
    StreamId id;
    bool with_truth = false;
    if (h.rfind("seq,ts_ms", 0) == 0) {
      with_truth = split_csv(h).size() > 5;
      check_columns(h, with_truth ? kKpiHeaderTruth : kKpiHeader);
      id = StreamId::Kpi;
    } else if (h.rfind("seq,label", 0) == 0) {
      check_columns(h, kLabelHeader);
      id = StreamId::Labels;
    } else if (h.rfind("seq,prob", 0) == 0) {
      check_columns(h, kDetectionHeader);
      id = StreamId::Detections;
    } else {
      auto cols = split_csv(h);
      std::string bad = cols.size() > 1 ? std::string(cols[1]) : std::string(h);
      throw SchemaError(path.string() + ": unknown column '" + bad + "'");
    }
    if (expected && *expected != id) throw SchemaError(path.string() + ": stream kind mismatch");

    const std::size_t width = split_csv(csv_header(id, with_truth)).size();
    for_each_line(in, [&](std::string_view line, std::size_t line_no) {
      ++line_no;  // header occupies the first line
      auto f = split_csv(line);
      if (f.size() != width) {
        throw ParseError("line " + std::to_string(line_no) + ": expected " +
                         std::to_string(width) + " fields");
      }
      switch (id) {
        case StreamId::Kpi: {
          KpiSample s;
          s.seq = parse_number<std::int64_t>(f[0], "seq", line_no);
          s.ts_ms = parse_number<std::int64_t>(f[1], "ts_ms", line_no);
          s.snr_db = parse_number<double>(f[2], "snr_db", line_no);
          s.mcs = parse_number<int>(f[3], "mcs", line_no);
          s.bler = parse_number<double>(f[4], "bler", line_no);
          if (with_truth) s.truth_interference = parse_number<int>(f[5], "truth", line_no) != 0;
          kpi_.append(s);
          break;
        }
        case StreamId::Labels: {
          LabelRecord r;
          r.seq = parse_number<std::int64_t>(f[0], "seq", line_no);
          auto label = parse_label(f[1]);
          auto source = parse_label_source(f[3]);
          if (!label || !source) {
            throw ParseError("line " + std::to_string(line_no) + ": bad label or source");
          }
          r.label = *label;
          r.confidence = parse_number<double>(f[2], "confidence", line_no);
          r.source = *source;
          labels_.append(r);
          break;
        }
        case StreamId::Detections: {
          DetectionRecord r;
          r.seq = parse_number<std::int64_t>(f[0], "seq", line_no);
          r.prob = parse_number<double>(f[1], "prob", line_no);
          auto v = parse_verdict(f[2]);
          if (!v) throw ParseError("line " + std::to_string(line_no) + ": bad verdict");
          r.verdict = *v;
          r.model_version = parse_number<std::int64_t>(f[3], "model_version", line_no);
          r.latency_us = parse_number<std::int64_t>(f[4], "latency_us", line_no);
          detections_.append(r);
          break;
        }
      }
    });
    return id;
  }

  std::optional<StreamId> id = expected;
  for_each_line(in, [&](std::string_view line, std::size_t line_no) {
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!id) id = infer_from_keys(j, line_no);
    try {
      switch (*id) {
        case StreamId::Kpi:
          kpi_.append(kpi_from_json(j, line_no, nullptr));
          break;
        case StreamId::Labels:
          labels_.append(label_from_json(j, line_no));
          break;
        case StreamId::Detections:
          detections_.append(detection_from_json(j, line_no));
          break;
      }
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  });
  if (!id) throw SchemaError(path.string() + ": empty JSONL file and no stream given");
  return *id;
}

KpiTrace read_kpi_jsonl(std::istream& in) {
  KpiTrace trace;
  bool any_truth = false;
  bool all_truth = true;
  for_each_line(in, [&](std::string_view line, std::size_t line_no) {
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    bool has = false;
    try {
      trace.samples.push_back(kpi_from_json(j, line_no, &has));
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (auto why = kpi_violation(trace.samples.back()); !why.empty()) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + why);
    }
    if (trace.samples.size() > 1 &&
        trace.samples.back().seq <= trace.samples[trace.samples.size() - 2].seq) {
      throw ValidationError("line " + std::to_string(line_no) + ": seq not strictly increasing");
    }
    any_truth = any_truth || has;
    all_truth = all_truth && has;
  });
  if (any_truth && !all_truth) throw SchemaError("trace carries truth on some lines only");
  trace.has_truth = any_truth;
  return trace;
}

KpiTrace read_kpi_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace " + path.string());
  return read_kpi_jsonl(in);
}

void write_kpi_jsonl(std::ostream& out, const std::vector<KpiSample>& samples, bool with_truth) {
  for (const auto& s : samples) out << to_jsonl(s, with_truth) << '\n';
}

}  // namespace sajd
