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

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sajd/error.hpp"
#include "sajd/types.hpp"

namespace sajd {

enum class StreamId { Kpi, Labels, Detections };
enum class Format { Jsonl, Csv };

std::string_view stream_name(StreamId id);
/// Throws UnknownStream for names other than kpi, labels, detections.
StreamId parse_stream_id(std::string_view name);

class UnknownStream : public Error {
 public:
  using Error::Error;
};

/// Record failed its type invariants or repeated/regressed a seq.
class RejectedRecord : public Error {
 public:
  using Error::Error;
};

/// The store refuses to grow past its record cap instead of evicting.
class CapacityExceeded : public Error {
 public:
  using Error::Error;
};

inline constexpr std::size_t kDefaultMaxRecords = 1'000'000;
inline constexpr std::int64_t kMaxSeq = std::numeric_limits<std::int64_t>::max();

std::string violation(const KpiSample& r);
std::string violation(const LabelRecord& r);
std::string violation(const DetectionRecord& r);

/// Append-only, seq-ordered record sequence. Appends must carry strictly
/// increasing seq. Readers hold a shared lock, so every read is a consistent
/// prefix of the stream.
template <class Record>
class Stream {
 public:
  explicit Stream(std::string name, std::size_t max_records)
      : name_(std::move(name)), max_records_(max_records) {}

  /// Returns the stream length after the append.
  std::size_t append(const Record& r) {
    if (auto why = violation(r); !why.empty()) {
      throw RejectedRecord(name_ + " seq " + std::to_string(r.seq) + ": " + why);
    }
    std::unique_lock lock(mu_);
    if (!records_.empty() && r.seq <= records_.back().seq) {
      throw RejectedRecord(name_ + " seq " + std::to_string(r.seq) +
                           (find_locked(r.seq) ? ": duplicate seq" : ": seq out of order"));
    }
    if (records_.size() >= max_records_) {
      throw CapacityExceeded(name_ + ": record cap " + std::to_string(max_records_) + " reached");
    }
    records_.push_back(r);
    return records_.size();
  }

  /// Records with seq in [from_seq, to_seq], ordered by seq.
  std::vector<Record> window(std::int64_t from_seq, std::int64_t to_seq) const {
    if (from_seq > to_seq) {
      throw ValidationError(name_ + ": window requires from_seq <= to_seq");
    }
    std::shared_lock lock(mu_);
    auto [lo, hi] = bounds_locked(from_seq, to_seq);
    return {lo, hi};
  }

  std::size_t count_in(std::int64_t from_seq, std::int64_t to_seq) const {
    if (from_seq > to_seq) return 0;
    std::shared_lock lock(mu_);
    auto [lo, hi] = bounds_locked(from_seq, to_seq);
    return static_cast<std::size_t>(hi - lo);
  }

  std::vector<Record> all() const {
    std::shared_lock lock(mu_);
    return records_;
  }

  std::optional<Record> find(std::int64_t seq) const {
    std::shared_lock lock(mu_);
    return find_locked(seq);
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return records_.size();
  }

  std::optional<std::int64_t> last_seq() const {
    std::shared_lock lock(mu_);
    if (records_.empty()) return std::nullopt;
    return records_.back().seq;
  }

  const std::string& name() const { return name_; }

 private:
  using Iter = typename std::vector<Record>::const_iterator;

  std::pair<Iter, Iter> bounds_locked(std::int64_t from_seq, std::int64_t to_seq) const {
    auto lo = std::lower_bound(records_.begin(), records_.end(), from_seq,
                               [](const Record& r, std::int64_t s) { return r.seq < s; });
    auto hi = std::upper_bound(lo, records_.end(), to_seq,
                               [](std::int64_t s, const Record& r) { return s < r.seq; });
    return {lo, hi};
  }

  std::optional<Record> find_locked(std::int64_t seq) const {
    auto [lo, hi] = bounds_locked(seq, seq);
    if (lo == hi) return std::nullopt;
    return *lo;
  }

  std::string name_;
  std::size_t max_records_;
  mutable std::shared_mutex mu_;
  std::vector<Record> records_;
};

/// In-memory stand-in for the telemetry database: three named streams with
/// explicit file persistence.
class TelemetryStore {
 public:
  explicit TelemetryStore(std::size_t max_records = kDefaultMaxRecords);

  Stream<KpiSample>& kpi() { return kpi_; }
  const Stream<KpiSample>& kpi() const { return kpi_; }
  Stream<LabelRecord>& labels() { return labels_; }
  const Stream<LabelRecord>& labels() const { return labels_; }
  Stream<DetectionRecord>& detections() { return detections_; }
  const Stream<DetectionRecord>& detections() const { return detections_; }

  std::size_t append(const KpiSample& r) { return kpi_.append(r); }
  std::size_t append(const LabelRecord& r) { return labels_.append(r); }
  std::size_t append(const DetectionRecord& r) { return detections_.append(r); }

  std::size_t count(StreamId id) const;

  /// Inner join of kpi and labels on seq within [from_seq, to_seq].
  /// Unlabeled records are skipped.
  std::vector<std::pair<KpiSample, LabelRecord>> join_labels(std::int64_t from_seq = 0,
                                                             std::int64_t to_seq = kMaxSeq) const;

  /// Inner join of detections and labels on seq within [from_seq, to_seq].
  std::vector<std::pair<DetectionRecord, LabelRecord>> join_detections(
      std::int64_t from_seq = 0, std::int64_t to_seq = kMaxSeq) const;

  /// Writes one stream to disk. KPI truth is written only when `with_truth`.
  std::size_t export_stream(StreamId id, const std::filesystem::path& path, Format format,
                            bool with_truth = true) const;

  /// Appends the records of a file to the matching stream. The stream kind is
  /// inferred from the header (CSV) or keys (JSONL); `expected` is required to
  /// import an empty JSONL file.
  StreamId import_stream(const std::filesystem::path& path, Format format,
                         std::optional<StreamId> expected = std::nullopt);

 private:
  Stream<KpiSample> kpi_;
  Stream<LabelRecord> labels_;
  Stream<DetectionRecord> detections_;
};

// Line codecs, shared by the store, the CLI and the experiment harness.
std::string format_real(double v);
std::string to_jsonl(const KpiSample& s, bool with_truth);
std::string to_jsonl(const LabelRecord& r);
std::string to_jsonl(const DetectionRecord& r);
std::string to_csv(const KpiSample& s, bool with_truth);
std::string to_csv(const LabelRecord& r);
std::string to_csv(const DetectionRecord& r);
std::string_view csv_header(StreamId id, bool with_truth = true);

struct KpiTrace {
  std::vector<KpiSample> samples;
  bool has_truth = false;
};

/// Reads a KPI JSONL trace (`seq, ts_ms, snr_db, mcs, bler[, truth]`).
KpiTrace read_kpi_jsonl(std::istream& in);
KpiTrace read_kpi_jsonl(const std::filesystem::path& path);
void write_kpi_jsonl(std::ostream& out, const std::vector<KpiSample>& samples, bool with_truth);

}  // namespace sajd
