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

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace envnet {

// All stored instants are UTC at whole-second resolution.
using Instant = std::chrono::sys_seconds;
// Wall-clock reading in a site's local standard time (never DST).
using LocalInstant = std::chrono::local_seconds;
using CivilDate = std::chrono::year_month_day;

inline Instant from_epoch(std::int64_t s) { return Instant{std::chrono::seconds{s}}; }
inline std::int64_t to_epoch(Instant t) { return t.time_since_epoch().count(); }

inline Instant to_utc(LocalInstant local, int utc_offset_min) {
  return Instant{local.time_since_epoch() - std::chrono::minutes{utc_offset_min}};
}
inline LocalInstant to_local(Instant utc, int utc_offset_min) {
  return LocalInstant{utc.time_since_epoch() + std::chrono::minutes{utc_offset_min}};
}

// `YYYY-MM-DDThh:mm:ssZ`
std::string format_iso_utc(Instant t);
std::optional<Instant> parse_iso_utc(std::string_view text);

// `YYYY-MM-DD hh:mm:ss`, as written by loggers.
std::string format_local(LocalInstant t);
std::optional<LocalInstant> parse_local(std::string_view text);

// `YYYY-MM-DD`
std::string format_date(CivilDate d);
std::optional<CivilDate> parse_date(std::string_view text);

// Accepts a full ISO instant or a bare date (midnight UTC).
std::optional<Instant> parse_instant_or_date(std::string_view text);

// `YYYY-MM` of the UTC month containing t.
std::string month_key(Instant t);
// First instant of the UTC month after the one containing t.
Instant next_month_start(Instant t);

CivilDate local_date(Instant utc, int utc_offset_min);
// UTC instant of local-standard midnight opening `date`.
Instant local_midnight(CivilDate date, int utc_offset_min);
// Minutes after local-standard midnight, in [0, 1440).
int local_minute_of_day(Instant utc, int utc_offset_min);
int day_of_year(CivilDate date);

}  // namespace envnet
