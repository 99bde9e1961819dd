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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "envnet/store.hpp"

namespace envnet::health {

// Maximal run of missing lattice points; start and end are the first and
// last missing points.
struct Gap {
  Instant start;
  Instant end;
  std::int64_t missing_count = 0;

  bool operator==(const Gap&) const = default;
};

struct GapReport {
  std::string channel_id;
  Instant from;
  Instant to;
  std::int64_t cadence_s = 0;
  std::vector<Gap> gaps;
  std::int64_t expected = 0;
  std::int64_t present = 0;
  double uptime_fraction = 0.0;
};

// Lattice from, from+cadence, ... strictly before `to`. A record within
// cadence/2 of a lattice point fills it. Records flagged MISSING do not count.
// Throws kUnknownChannel, kInvertedRange, kBadParams.
GapReport detect_gaps(const Store& store, std::string_view channel_id, Instant from, Instant to,
                      std::int64_t cadence_s);
// Uses the deployment cadence.
GapReport detect_gaps(const Store& store, std::string_view channel_id, Instant from, Instant to);

struct NodeHealth {
  std::string node_id;
  std::int64_t expected = 0;
  std::int64_t present = 0;
  double uptime_fraction = 0.0;
  std::size_t rows_ok = 0;
  std::size_t rows_rejected = 0;
  double reject_rate = 0.0;
  double flags_rate = 0.0;
  bool deployment_suspect = false;
};

// Nodes ordered worst-first: lowest uptime, then highest reject rate, then
// highest flag rate, then node id. Reject counts come from uploads to this
// deployment whose span overlaps the window.
// Throws kUnknownDeployment, kInvalidArgument for an empty window.
std::vector<NodeHealth> node_health_summary(const Store& store, std::string_view deployment_id, Instant from,
                                            Instant to);

nlohmann::json to_json(const GapReport& r);
nlohmann::json to_json(const NodeHealth& n);

}  // namespace envnet::health
