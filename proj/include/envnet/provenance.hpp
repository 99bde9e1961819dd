/* Copyright 2026 The envnet Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "envnet/store.hpp"
#include "envnet/types.hpp"

namespace envnet::ingest {

// Arithmetic run of timestamps: start, start+step, ... (count values).
struct TimestampRun {
  std::int64_t start = 0;
  std::int64_t step = 0;
  std::int64_t count = 0;

  bool contains(std::int64_t t) const;
  bool operator==(const TimestampRun&) const = default;
};

struct ChannelRuns {
  std::string channel_id;
  std::vector<TimestampRun> runs;

  bool contains(std::int64_t t) const;
  bool operator==(const ChannelRuns&) const = default;
};

// Greedy run-length encoding of ascending, distinct timestamps.
std::vector<TimestampRun> compress_runs(std::span<const Instant> sorted);

struct NodeRowStats {
  std::size_t ok = 0;
  std::size_t rejected = 0;

  bool operator==(const NodeRowStats&) const = default;
};

// Dated addition to an upload's history. Entries themselves never change.
struct Amendment {
  std::string amendment_id;
  Instant created_at_utc;
  std::string user;
  std::vector<std::string> amends;
  std::string operation;  // "time_correction" or "note"
  std::string channel_id;
  Instant range_from;
  Instant range_to;
  int offset_hours = 0;
  std::size_t corrected_count = 0;
  // Post-correction timestamps of the records this amendment moved.
  std::vector<TimestampRun> moved;
  std::string notes;

  bool operator==(const Amendment&) const = default;
};

struct ProvenanceEntry {
  std::string upload_id;
  Instant ingested_at_utc;
  std::string source_name;
  std::string source_sha256;
  std::string user;
  std::string dialect;
  int dialect_version = 1;
  std::string deployment_id;
  std::vector<std::string> options;  // key=value
  std::size_t rows_ok = 0;
  std::size_t rows_rejected = 0;
  std::size_t duplicates = 0;
  std::size_t records_written = 0;
  std::string notes;
  std::vector<std::string> warnings;
  std::map<std::string, NodeRowStats> node_stats;
  std::optional<std::pair<Instant, Instant>> span;  // first/last accepted ts_utc
  std::vector<ChannelRuns> written;
  std::string quarantine_path;
  // Linked amendments in ledger order; filled on read.
  std::vector<Amendment> amendments;

  bool operator==(const ProvenanceEntry&) const = default;
};

nlohmann::json to_json(const ProvenanceEntry& e);
nlohmann::json to_json(const Amendment& a);

// Parsed view of <root>/provenance.jsonl.
class Ledger {
 public:
  static Ledger load(const Store& store);

  const std::vector<ProvenanceEntry>& uploads() const { return uploads_; }
  const std::vector<Amendment>& amendments() const { return amendments_; }
  const ProvenanceEntry* find(std::string_view upload_id) const;
  const ProvenanceEntry* find_by_sha256(std::string_view sha) const;
  // Upload ids whose written runs contain (channel, t).
  std::vector<std::string> uploads_containing(std::string_view channel_id, Instant t) const;

 private:
  std::vector<ProvenanceEntry> uploads_;
  std::vector<Amendment> amendments_;
};

// Throws Error(kUnknownUpload).
ProvenanceEntry get_provenance(const Store& store, std::string_view upload_id);

// Adds a dated free-text amendment to an existing upload.
Amendment append_note(Store& store, std::string_view upload_id, std::string_view user, std::string_view text);

// Chain of amendments (newest first) and the upload(s) a stored record
// originates from. Auditability requires exactly one upload.
struct RecordOrigin {
  std::vector<std::string> amendments;
  std::vector<std::string> uploads;
};
RecordOrigin trace_record(const Ledger& ledger, std::string_view channel_id, const SensorRecord& record);

std::string sha256_hex(std::string_view bytes);
Instant now_utc();

}  // namespace envnet::ingest
