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

#include "envnet/provenance.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "envnet/error.hpp"

namespace envnet::ingest {

using nlohmann::json;

namespace {

json runs_to_json(const std::vector<TimestampRun>& runs) {
  json out = json::array();
  for (const auto& r : runs) out.push_back({r.start, r.step, r.count});
  return out;
}

std::vector<TimestampRun> runs_from_json(const json& j) {
  std::vector<TimestampRun> runs;
  for (const auto& r : j) runs.push_back({r.at(0).get<std::int64_t>(), r.at(1).get<std::int64_t>(), r.at(2).get<std::int64_t>()});
  return runs;
}

Instant instant_field(const json& j, const char* key) {
  auto t = parse_iso_utc(j.at(key).get<std::string>());
  if (!t) throw Error(ErrorCode::kCorruptStore, std::string("bad timestamp in ledger field ") + key);
  return *t;
}

ProvenanceEntry entry_from_json(const json& j) {
  ProvenanceEntry e;
  e.upload_id = j.at("upload_id").get<std::string>();
  e.ingested_at_utc = instant_field(j, "ingested_at_utc");
  e.source_name = j.value("source_name", "");
  e.source_sha256 = j.at("source_sha256").get<std::string>();
  e.user = j.value("user", "");
  e.dialect = j.value("dialect", "");
  e.dialect_version = j.value("dialect_version", 1);
  e.deployment_id = j.value("deployment_id", "");
  e.options = j.value("options", std::vector<std::string>{});
  e.rows_ok = j.value("rows_ok", std::size_t{0});
  e.rows_rejected = j.value("rows_rejected", std::size_t{0});
  e.duplicates = j.value("duplicates", std::size_t{0});
  e.records_written = j.value("records_written", std::size_t{0});
  e.notes = j.value("notes", "");
  e.warnings = j.value("warnings", std::vector<std::string>{});
  const auto node_stats = j.value("node_stats", json::object());
  for (const auto& [node, stats] : node_stats.items()) {
    e.node_stats[node] = {stats.at("ok").get<std::size_t>(), stats.at("rejected").get<std::size_t>()};
  }
  if (j.contains("span") && !j.at("span").is_null()) {
    auto a = parse_iso_utc(j.at("span").at(0).get<std::string>());
    auto b = parse_iso_utc(j.at("span").at(1).get<std::string>());
    if (a && b) e.span = std::make_pair(*a, *b);
  }
  for (const auto& w : j.value("written", json::array())) {
    e.written.push_back({w.at("channel").get<std::string>(), runs_from_json(w.at("runs"))});
  }
  e.quarantine_path = j.value("quarantine", "");
  return e;
}

Amendment amendment_from_json(const json& j) {
  Amendment a;
  a.amendment_id = j.at("amendment_id").get<std::string>();
  a.created_at_utc = instant_field(j, "created_at_utc");
  a.user = j.value("user", "");
  a.amends = j.value("amends", std::vector<std::string>{});
  a.operation = j.value("operation", "");
  a.channel_id = j.value("channel", "");
  if (j.contains("range")) {
    a.range_from = parse_iso_utc(j.at("range").at(0).get<std::string>()).value_or(Instant{});
    a.range_to = parse_iso_utc(j.at("range").at(1).get<std::string>()).value_or(Instant{});
  }
  a.offset_hours = j.value("offset_hours", 0);
  a.corrected_count = j.value("corrected_count", std::size_t{0});
  a.moved = runs_from_json(j.value("moved", json::array()));
  a.notes = j.value("notes", "");
  return a;
}

}  // namespace

bool TimestampRun::contains(std::int64_t t) const {
  if (count <= 0 || t < start) return false;
  if (step == 0) return t == start;
  auto k = (t - start) / step;
  return (t - start) % step == 0 && k < count;
}

bool ChannelRuns::contains(std::int64_t t) const {
  return std::any_of(runs.begin(), runs.end(), [&](const TimestampRun& r) { return r.contains(t); });
}

std::vector<TimestampRun> compress_runs(std::span<const Instant> sorted) {
  std::vector<TimestampRun> runs;
  std::size_t i = 0;
  while (i < sorted.size()) {
    TimestampRun run{to_epoch(sorted[i]), 0, 1};
    if (i + 1 < sorted.size()) {
      run.step = to_epoch(sorted[i + 1]) - run.start;
      run.count = 2;
      std::size_t j = i + 2;
      while (j < sorted.size() && to_epoch(sorted[j]) - to_epoch(sorted[j - 1]) == run.step) {
        ++run.count;
        ++j;
      }
    }
    runs.push_back(run);
    i += static_cast<std::size_t>(run.count);
  }
  return runs;
}

json to_json(const ProvenanceEntry& e) {
  json node_stats = json::object();
  for (const auto& [node, s] : e.node_stats) node_stats[node] = {{"ok", s.ok}, {"rejected", s.rejected}};
  json written = json::array();
  for (const auto& w : e.written) written.push_back({{"channel", w.channel_id}, {"runs", runs_to_json(w.runs)}});
  json span = nullptr;
  if (e.span) span = {format_iso_utc(e.span->first), format_iso_utc(e.span->second)};
  json j = {{"kind", "upload"},
            {"upload_id", e.upload_id},
            {"ingested_at_utc", format_iso_utc(e.ingested_at_utc)},
            {"source_name", e.source_name},
            {"source_sha256", e.source_sha256},
            {"user", e.user},
            {"dialect", e.dialect},
            {"dialect_version", e.dialect_version},
            {"deployment_id", e.deployment_id},
            {"options", e.options},
            {"rows_ok", e.rows_ok},
            {"rows_rejected", e.rows_rejected},
            {"duplicates", e.duplicates},
            {"records_written", e.records_written},
            {"notes", e.notes},
            {"warnings", e.warnings},
            {"node_stats", node_stats},
            {"span", span},
            {"written", written},
            {"quarantine", e.quarantine_path}};
  if (!e.amendments.empty()) {
    json amendments = json::array();
    for (const auto& a : e.amendments) amendments.push_back(to_json(a));
    j["amendments"] = amendments;
  }
  return j;
}

json to_json(const Amendment& a) {
  return {{"kind", "amendment"},
          {"amendment_id", a.amendment_id},
          {"created_at_utc", format_iso_utc(a.created_at_utc)},
          {"user", a.user},
          {"amends", a.amends},
          {"operation", a.operation},
          {"channel", a.channel_id},
          {"range", {format_iso_utc(a.range_from), format_iso_utc(a.range_to)}},
          {"offset_hours", a.offset_hours},
          {"corrected_count", a.corrected_count},
          {"moved", runs_to_json(a.moved)},
          {"notes", a.notes}};
}

Ledger Ledger::load(const Store& store) {
  Ledger ledger;
  auto text = store.read_file(kLedgerFile).value_or("");
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::kCorruptStore, "provenance.jsonl:" + std::to_string(line_no) + ": invalid JSON");
    }
    try {
      if (j.value("kind", "") == "amendment") {
        ledger.amendments_.push_back(amendment_from_json(j));
      } else {
        ledger.uploads_.push_back(entry_from_json(j));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kCorruptStore, "provenance.jsonl:" + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (auto& u : ledger.uploads_) {
    for (const auto& a : ledger.amendments_) {
      if (std::find(a.amends.begin(), a.amends.end(), u.upload_id) != a.amends.end()) u.amendments.push_back(a);
    }
  }
  return ledger;
}

const ProvenanceEntry* Ledger::find(std::string_view upload_id) const {
  for (const auto& u : uploads_) {
    if (u.upload_id == upload_id) return &u;
  }
  return nullptr;
}

const ProvenanceEntry* Ledger::find_by_sha256(std::string_view sha) const {
  for (const auto& u : uploads_) {
    if (u.source_sha256 == sha) return &u;
  }
  return nullptr;
}

std::vector<std::string> Ledger::uploads_containing(std::string_view channel_id, Instant t) const {
  std::vector<std::string> ids;
  for (const auto& u : uploads_) {
    for (const auto& w : u.written) {
      if (w.channel_id == channel_id && w.contains(to_epoch(t))) {
        ids.push_back(u.upload_id);
        break;
      }
    }
  }
  return ids;
}

ProvenanceEntry get_provenance(const Store& store, std::string_view upload_id) {
  auto ledger = Ledger::load(store);
  const auto* e = ledger.find(upload_id);
  if (!e) throw Error(ErrorCode::kUnknownUpload, "unknown upload " + std::string(upload_id));
  return *e;
}

Amendment append_note(Store& store, std::string_view upload_id, std::string_view user, std::string_view text) {
  auto batch = store.begin_write();
  auto ledger = Ledger::load(store);
  if (!ledger.find(upload_id)) throw Error(ErrorCode::kUnknownUpload, "unknown upload " + std::string(upload_id));
  Amendment a;
  a.created_at_utc = now_utc();
  a.user = std::string(user);
  a.amends = {std::string(upload_id)};
  a.operation = "note";
  a.notes = std::string(text);
  a.range_from = a.range_to = a.created_at_utc;
  a.amendment_id = "a" + sha256_hex(std::string(upload_id) + "|note|" + std::to_string(ledger.amendments().size()) +
                                    "|" + a.notes).substr(0, 15);
  batch.append_ledger_line(to_json(a).dump());
  batch.commit();
  return a;
}

RecordOrigin trace_record(const Ledger& ledger, std::string_view channel_id, const SensorRecord& record) {
  RecordOrigin origin;
  auto t = to_epoch(record.ts_utc);
  if (record.flags.contains(QualityFlag::kTimeCorrected)) {
    const auto& amendments = ledger.amendments();
    for (auto it = amendments.rbegin(); it != amendments.rend(); ++it) {
      if (it->operation != "time_correction" || it->channel_id != channel_id) continue;
      bool moved = std::any_of(it->moved.begin(), it->moved.end(), [&](const TimestampRun& r) { return r.contains(t); });
      if (!moved) continue;
      origin.amendments.push_back(it->amendment_id);
      t += static_cast<std::int64_t>(it->offset_hours) * 3600;
    }
  }
  origin.uploads = ledger.uploads_containing(channel_id, from_epoch(t));
  return origin;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::string hex;
  hex.reserve(len * 2);
  char buf[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

Instant now_utc() { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }

}  // namespace envnet::ingest
