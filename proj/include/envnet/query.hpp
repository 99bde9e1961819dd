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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "envnet/store.hpp"
#include "envnet/types.hpp"

namespace envnet::query {

enum class BinSize { kHour, kDay, kMonth };
enum class Stat { kMean, kMin, kMax, kCount, kSum };

std::string_view bin_name(BinSize b);
std::string_view stat_name(Stat s);

struct Aggregation {
  BinSize bin = BinSize::kDay;
  Stat stat = Stat::kMean;

  bool operator==(const Aggregation&) const = default;
};

// Local-standard minutes of day, half-open [start, end). Wraps midnight when
// start > end.
struct TodWindow {
  int start_min = 0;
  int end_min = 1440;

  bool contains(int minute_of_day) const;
  bool operator==(const TodWindow&) const = default;
};

struct ValueBounds {
  double min = 0.0;
  double max = 0.0;

  bool operator==(const ValueBounds&) const = default;
};

FlagSet default_exclusions();

struct QuerySpec {
  // Store channel ids or `derived:<product>:<node_id>`.
  std::vector<std::string> channels;
  Instant from;
  Instant to;
  std::optional<TodWindow> tod_window;
  // Keyed by variable name (air_temp_C, ...) or derived product name (ndvi, ...).
  std::map<std::string, ValueBounds> value_bounds;
  FlagSet exclude_flagged = default_exclusions();
  std::optional<double> clear_sky_par_min;
  // Gate channel override; defaults to the first incoming PAR channel of the
  // queried channel's deployment.
  std::optional<std::string> par_channel;
  std::optional<Aggregation> agg;
  bool raw_values = false;

  bool operator==(const QuerySpec&) const = default;
};

struct SeriesPoint {
  Instant ts;
  std::optional<double> value;
  std::size_t count = 0;

  bool operator==(const SeriesPoint&) const = default;
};

struct Series {
  std::string channel_id;
  std::vector<SeriesPoint> points;

  bool operator==(const Series&) const = default;
};

// Series sorted by channel id, points by timestamp. Without aggregation each
// surviving record is one point with count 1; with aggregation every bin in
// the range is present, empty ones with count 0 and no value.
std::vector<Series> run_query(const Store& store, const QuerySpec& spec);

// Start of the local-standard bin containing `ts`, as a UTC instant.
Instant bin_start(Instant ts, BinSize bin, int utc_offset_min);
Instant next_bin(Instant bin_start, BinSize bin, int utc_offset_min);

// Textual key=value form shared by the CLI and HTTP API.
using ParamMap = std::multimap<std::string, std::string>;

// Throws kUnknownParameter for keys outside the query vocabulary and
// `also_allowed`, kInvalidArgument for malformed values and kInvertedRange.
QuerySpec parse_query_params(const ParamMap& params, const std::set<std::string>& also_allowed = {});
ParamMap to_query_params(const QuerySpec& spec);
// Percent-encoded `k=v&...` in key order.
std::string encode_query_string(const ParamMap& params);

}  // namespace envnet::query
