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

#include "envnet/health.hpp"

#include <algorithm>

#include "envnet/error.hpp"
#include "envnet/provenance.hpp"

namespace envnet::health {

namespace {

bool names_node(std::string_view list, std::string_view node_id) {
  std::size_t pos = 0;
  while (pos <= list.size()) {
    auto comma = list.find(',', pos);
    if (comma == std::string_view::npos) comma = list.size();
    if (list.substr(pos, comma - pos) == node_id) return true;
    pos = comma + 1;
  }
  return false;
}

GapReport gaps_from_records(std::string_view channel_id, const std::vector<SensorRecord>& records, Instant from,
                            Instant to, std::int64_t cadence_s) {
  GapReport out;
  out.channel_id = std::string(channel_id);
  out.from = from;
  out.to = to;
  out.cadence_s = cadence_s;
  const std::int64_t span = to_epoch(to) - to_epoch(from);
  out.expected = (span + cadence_s - 1) / cadence_s;

  std::vector<bool> filled(static_cast<std::size_t>(out.expected), false);
  for (const auto& r : records) {
    if (r.flags.contains(QualityFlag::kMissing)) continue;
    std::int64_t off = to_epoch(r.ts_utc) - to_epoch(from);
    // Nearest lattice index; ties at exactly half a cadence are not counted.
    std::int64_t k = off >= 0 ? (off + cadence_s / 2) / cadence_s : -((-off + cadence_s / 2) / cadence_s);
    std::int64_t delta = off - k * cadence_s;
    if (2 * std::abs(delta) >= cadence_s) continue;
    if (k < 0 || k >= out.expected) continue;
    filled[static_cast<std::size_t>(k)] = true;
  }

  for (std::int64_t k = 0; k < out.expected;) {
    if (filled[static_cast<std::size_t>(k)]) {
      ++out.present;
      ++k;
      continue;
    }
    std::int64_t first = k;
    while (k < out.expected && !filled[static_cast<std::size_t>(k)]) ++k;
    out.gaps.push_back({from + std::chrono::seconds{first * cadence_s},
                        from + std::chrono::seconds{(k - 1) * cadence_s}, k - first});
  }
  out.uptime_fraction = out.expected > 0 ? static_cast<double>(out.present) / static_cast<double>(out.expected) : 1.0;
  return out;
}

}  // namespace

GapReport detect_gaps(const Store& store, std::string_view channel_id, Instant from, Instant to,
                      std::int64_t cadence_s) {
  if (cadence_s <= 0) throw Error(ErrorCode::kBadParams, "cadence must be > 0");
  if (to < from) throw Error(ErrorCode::kInvertedRange, "gap range is inverted");
  auto half = std::chrono::seconds{cadence_s / 2};
  auto records = store.read_records(channel_id, from - half, to + half);
  return gaps_from_records(channel_id, records, from, to, cadence_s);
}

GapReport detect_gaps(const Store& store, std::string_view channel_id, Instant from, Instant to) {
  auto manifest = store.manifest();
  auto ref = manifest.channel(channel_id);
  return detect_gaps(store, channel_id, from, to, ref.deployment->cadence_s);
}

std::vector<NodeHealth> node_health_summary(const Store& store, std::string_view deployment_id, Instant from,
                                            Instant to) {
  auto manifest = store.manifest();
  const auto* dep = manifest.find_deployment(deployment_id);
  if (!dep) throw Error(ErrorCode::kUnknownDeployment, "unknown deployment: " + std::string(deployment_id));
  if (!(from < to)) throw Error(ErrorCode::kInvalidArgument, "health window must be non-empty");

  auto ledger = ingest::Ledger::load(store);
  std::vector<NodeHealth> out;
  for (const auto& node : dep->nodes) {
    NodeHealth h;
    h.node_id = node.node_id;
    std::size_t flagged = 0;
    for (const auto& c : node.channels) {
      auto half = std::chrono::seconds{dep->cadence_s / 2};
      auto records = store.read_records(c.channel_id, from - half, to + half);
      auto report = gaps_from_records(c.channel_id, records, from, to, dep->cadence_s);
      h.expected += report.expected;
      h.present += report.present;
      for (const auto& r : records) {
        if (r.ts_utc >= from && r.ts_utc < to && !r.flags.empty()) ++flagged;
      }
    }
    h.uptime_fraction = h.expected > 0 ? static_cast<double>(h.present) / static_cast<double>(h.expected) : 1.0;
    h.flags_rate = h.present > 0 ? static_cast<double>(flagged) / static_cast<double>(h.present) : 0.0;

    for (const auto& u : ledger.uploads()) {
      if (u.deployment_id != dep->deployment_id) continue;
      if (u.span && (u.span->second < from || u.span->first >= to)) continue;
      auto it = u.node_stats.find(node.node_id);
      if (it == u.node_stats.end()) continue;
      h.rows_ok += it->second.ok;
      h.rows_rejected += it->second.rejected;
      for (const auto& w : u.warnings) {
        if (w.rfind("DEPLOYMENT_SUSPECT: ", 0) == 0 && names_node(w.substr(20), node.node_id)) {
          h.deployment_suspect = true;
        }
      }
    }
    std::size_t rows = h.rows_ok + h.rows_rejected;
    h.reject_rate = rows > 0 ? static_cast<double>(h.rows_rejected) / static_cast<double>(rows) : 0.0;
    out.push_back(std::move(h));
  }
  std::sort(out.begin(), out.end(), [](const NodeHealth& a, const NodeHealth& b) {
    if (a.uptime_fraction != b.uptime_fraction) return a.uptime_fraction < b.uptime_fraction;
    if (a.reject_rate != b.reject_rate) return a.reject_rate > b.reject_rate;
    if (a.flags_rate != b.flags_rate) return a.flags_rate > b.flags_rate;
    return a.node_id < b.node_id;
  });
  return out;
}

nlohmann::json to_json(const GapReport& r) {
  auto gaps = nlohmann::json::array();
  for (const auto& g : r.gaps) {
    gaps.push_back({{"start_utc", format_iso_utc(g.start)}, {"end_utc", format_iso_utc(g.end)},
                    {"missing_count", g.missing_count}});
  }
  return {{"channel_id", r.channel_id},
          {"from", format_iso_utc(r.from)},
          {"to", format_iso_utc(r.to)},
          {"cadence_s", r.cadence_s},
          {"expected", r.expected},
          {"present", r.present},
          {"uptime_fraction", r.uptime_fraction},
          {"gaps", gaps}};
}

nlohmann::json to_json(const NodeHealth& n) {
  return {{"node_id", n.node_id},
          {"expected", n.expected},
          {"present", n.present},
          {"uptime_fraction", n.uptime_fraction},
          {"rows_ok", n.rows_ok},
          {"rows_rejected", n.rows_rejected},
          {"reject_rate", n.reject_rate},
          {"flags_rate", n.flags_rate},
          {"deployment_suspect", n.deployment_suspect}};
}

}  // namespace envnet::health
