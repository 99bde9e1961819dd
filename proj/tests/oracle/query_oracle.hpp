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

// Brute-force reference for run_query. Reads the month files directly and
// recomputes every filter and bin with plain integer arithmetic.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace oracle {

struct Row {
  std::int64_t t = 0;
  std::optional<double> raw;
  std::optional<double> eng;
  std::set<std::string> flags;
};

// Every row of a channel, across all month files, sorted by time.
std::vector<Row> scan_channel(const std::filesystem::path& store_root, const std::string& channel_id);

struct ChannelInfo {
  std::string channel_id;
  std::string variable;  // bounds key
  int utc_offset_min = 0;
  std::string gate_channel;  // incoming PAR used by the PAR filter
  std::int64_t gate_cadence_s = 900;
};

struct Filters {
  std::int64_t from = 0;
  std::int64_t to = 0;
  std::optional<std::pair<int, int>> tod;  // local minutes [start, end)
  std::map<std::string, std::pair<double, double>> bounds;
  std::set<std::string> exclude;
  std::optional<double> par_min;
  bool raw = false;
};

enum class Bin { kHour, kDay, kMonth };
enum class Stat { kMean, kMin, kMax, kCount, kSum };

struct Point {
  std::int64_t t = 0;
  std::optional<double> value;
  std::size_t count = 0;
};

// Filtered samples, one point per kept record. gate_rows is the scan of
// ch.gate_channel and is only read when f.par_min is set.
std::vector<Point> filtered(const std::vector<Row>& rows, const std::vector<Row>& gate_rows, const ChannelInfo& ch,
                            const Filters& f);
// Every bin touching [from, to), empty bins with count 0.
std::vector<Point> aggregated(const std::vector<Point>& kept, const ChannelInfo& ch, const Filters& f, Bin bin,
                              Stat stat);

// Days since 1970-01-01 for a proleptic Gregorian date, and back.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d);
void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d);

}  // namespace oracle
