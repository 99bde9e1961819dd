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

#include "envnet/ingest.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "envnet/error.hpp"

namespace envnet::ingest {

namespace {

std::string option_value(const std::vector<std::string>& options, std::string_view key) {
  for (const auto& o : options) {
    auto eq = o.find('=');
    if (eq != std::string::npos && std::string_view(o).substr(0, eq) == key) return o.substr(eq + 1);
  }
  return {};
}

// First node id in the data block of an aggregator file that the manifest knows.
std::string peek_aggregator_node(std::string_view bytes, const formats::FileHeader& header, const Manifest& manifest) {
  std::size_t pos = 0, line_no = 0;
  while (pos < bytes.size()) {
    auto nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) nl = bytes.size();
    auto line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    if (++line_no <= header.csv_header_line) continue;
    auto c1 = line.find(',');
    if (c1 == std::string_view::npos) continue;
    auto c2 = line.find(',', c1 + 1);
    auto id = line.substr(c1 + 1, c2 == std::string_view::npos ? std::string_view::npos : c2 - c1 - 1);
    while (!id.empty() && id.front() == ' ') id.remove_prefix(1);
    while (!id.empty() && id.back() == ' ') id.remove_suffix(1);
    if (manifest.find_node(id)) return std::string(id);
  }
  return {};
}

const Deployment& resolve_deployment(std::string_view bytes, const formats::FileHeader& header,
                                     const Manifest& manifest, const std::vector<std::string>& options) {
  if (auto id = option_value(options, "deployment"); !id.empty()) {
    const auto* d = manifest.find_deployment(id);
    if (!d) throw Error(ErrorCode::kUnknownDeployment, "unknown deployment " + id);
    return *d;
  }
  std::string node = header.dialect.kind == formats::DialectKind::kWirelessAggregator
                         ? peek_aggregator_node(bytes, header, manifest)
                         : header.source_node();
  auto ref = manifest.find_node(node);
  if (!ref) {
    throw Error(ErrorCode::kUnknownDeployment,
                "cannot attribute file to a deployment (node '" + node + "' not in manifest)");
  }
  return *ref->deployment;
}

}  // namespace

std::string quarantine_path(std::string_view upload_id) {
  return "quarantine/" + std::string(upload_id) + ".txt";
}

IngestResult ingest_file(Store& store, std::string_view bytes, std::string_view source_name, std::string_view user,
                         const std::vector<std::string>& options) {
  const std::string sha = sha256_hex(bytes);
  if (const auto ledger = Ledger::load(store); const auto* prior = ledger.find_by_sha256(sha)) {
    throw Error(ErrorCode::kDuplicateUpload, "identical content already ingested as " + prior->upload_id,
                prior->upload_id);
  }

  // Parse and validate outside the writer lock.
  auto dialect = formats::detect_dialect(bytes.substr(0, 4096));
  auto manifest = store.manifest();
  auto header = formats::read_header(bytes, dialect);
  const auto& deployment = resolve_deployment(bytes, header, manifest, options);
  const auto& site = manifest.site_of(deployment);
  auto parsed = formats::parse_file(bytes, dialect, site);
  auto validated = formats::validate_structure(parsed, manifest);

  IngestResult result;
  result.report = parsed.report;
  result.report.channel_map = validated.channel_map;
  result.report.unmapped_columns = validated.unmapped_columns;

  ProvenanceEntry entry;
  entry.upload_id = "u" + sha.substr(0, 15);
  entry.source_name = std::string(source_name);
  entry.source_sha256 = sha;
  entry.user = user.empty() ? std::string(kDefaultUser) : std::string(user);
  entry.dialect = std::string(formats::dialect_name(dialect.kind));
  entry.dialect_version = dialect.version;
  entry.deployment_id = deployment.deployment_id;
  entry.options = options;
  entry.notes = option_value(options, "notes");
  entry.rows_ok = parsed.report.rows_ok;
  entry.rows_rejected = parsed.report.rows_rejected;
  entry.quarantine_path = quarantine_path(entry.upload_id);
  for (const auto& row : parsed.rows) ++entry.node_stats[row.node_id.value_or("")].ok;
  for (const auto& err : parsed.report.errors) ++entry.node_stats[err.node_id].rejected;

  std::string suspects;
  for (const auto& [node, s] : entry.node_stats) {
    const std::size_t rows = s.ok + s.rejected;
    if (rows == 0 || static_cast<double>(s.rejected) / static_cast<double>(rows) <= kSuspectRejectRate) continue;
    if (!suspects.empty()) suspects += ',';
    suspects += node.empty() ? "(unattributed)" : node;
  }
  if (!suspects.empty()) result.report.warnings.push_back("DEPLOYMENT_SUSPECT: " + suspects);
  for (const auto& col : validated.unmapped_columns) result.report.warnings.push_back("UNMAPPED_COLUMN: " + col);
  entry.warnings = result.report.warnings;

  std::string quarantine;
  for (const auto& [line_no, text] : parsed.rejected_lines) {
    quarantine += std::to_string(line_no);
    quarantine += ':';
    quarantine += text;
    quarantine += '\n';
  }

  auto batch = store.begin_write();
  if (const auto ledger = Ledger::load(store); const auto* prior = ledger.find_by_sha256(sha)) {
    throw Error(ErrorCode::kDuplicateUpload, "identical content already ingested as " + prior->upload_id,
                prior->upload_id);
  }
  std::optional<Instant> first, last;
  for (auto& [channel_id, records] : validated.records) {
    std::stable_sort(records.begin(), records.end(),
                     [](const SensorRecord& a, const SensorRecord& b) { return a.ts_utc < b.ts_utc; });
    auto appended = batch.append(channel_id, records);
    result.records_written += appended.written;
    result.duplicates += appended.duplicates;
    if (!appended.written_ts.empty()) {
      entry.written.push_back({channel_id, compress_runs(appended.written_ts)});
      first = first ? std::min(*first, appended.written_ts.front()) : appended.written_ts.front();
      last = last ? std::max(*last, appended.written_ts.back()) : appended.written_ts.back();
    }
  }
  if (first) entry.span = std::make_pair(*first, *last);
  entry.records_written = result.records_written;
  entry.duplicates = result.duplicates;
  entry.ingested_at_utc = now_utc();
  batch.put_file(entry.quarantine_path, quarantine);
  batch.append_ledger_line(to_json(entry).dump());
  batch.commit();

  result.upload_id = entry.upload_id;
  return result;
}

}  // namespace envnet::ingest
