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
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "envnet/manifest.hpp"
#include "envnet/types.hpp"

namespace envnet {

struct AppendResult {
  std::size_t written = 0;
  std::size_t duplicates = 0;
  // Timestamps actually written, in input order.
  std::vector<Instant> written_ts;
};

// Observes every durable write step: phase is "stage", "commit" or "apply".
// Tests use it to kill the process at chosen points.
using WriteHook = std::function<void(std::string_view phase, std::size_t step)>;

inline constexpr std::string_view kRecordHeader = "ts_utc,raw,eng,flags";

// Relative paths inside a store.
std::string record_file_path(std::string_view channel_id, std::string_view month);
inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kLedgerFile = "provenance.jsonl";

// Persisted value text: at most 6 significant digits.
std::string format_value(double v);
std::string format_record_line(const SensorRecord& r);
// Parses one data line of a record file; nullopt on any syntax error.
std::optional<SensorRecord> parse_record_line(std::string_view line);
// Applies the persisted encoding so in-memory records equal their read-back.
SensorRecord quantize(SensorRecord r);

class WriteBatch;

// Handle to an on-disk store. Copies share state; safe to use from several
// threads. Writes serialize through WriteBatch, which holds the store lock.
class Store {
 public:
  static Store open(const std::filesystem::path& root, bool create_if_missing);

  const std::filesystem::path& root() const;
  Manifest manifest() const;

  // Starts a write transaction; blocks until the store lock is free and
  // finishes or discards transactions left behind by a crashed writer.
  WriteBatch begin_write();

  AppendResult append_records(std::string_view channel_id, std::span<const SensorRecord> records);
  std::vector<SensorRecord> read_records(std::string_view channel_id, Instant from, Instant to) const;
  // Months (YYYY-MM) holding data for the channel, ascending.
  std::vector<std::string> channel_months(std::string_view channel_id) const;

  // Contents of a store-relative file as committed, or nullopt if absent.
  std::optional<std::string> read_file(std::string_view relpath) const;

  void set_write_hook(WriteHook hook);

  struct Impl;

 private:
  explicit Store(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<Impl> impl_;
  friend class WriteBatch;
};

class WriteBatch {
 public:
  WriteBatch(WriteBatch&&) noexcept;
  WriteBatch& operator=(WriteBatch&&) = delete;
  ~WriteBatch();

  // Same contract as Store::append_records, staged until commit().
  AppendResult append(std::string_view channel_id, std::span<const SensorRecord> records);
  // After commit the channel holds its old records outside [from, to) plus
  // `replacement`. Caller guarantees no timestamp collisions.
  void replace_range(std::string_view channel_id, Instant from, Instant to,
                     std::vector<SensorRecord> replacement);
  void put_file(std::string relpath, std::string content);
  void append_ledger_line(std::string_view line);
  void set_manifest(const Manifest& manifest);

  // Makes every staged change durable at once, or none of them, and releases
  // the store lock.
  void commit();

 private:
  friend class Store;
  struct State;
  explicit WriteBatch(std::unique_ptr<State> state);
  std::unique_ptr<State> state_;
};

}  // namespace envnet
