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

#include "envnet/time.hpp"

#include <cstdio>

namespace envnet {

namespace {

using namespace std::chrono;

bool read_digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
  if (pos + n > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    char c = s[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

std::optional<CivilDate> read_date(std::string_view s) {
  int y, m, d;
  if (!read_digits(s, 0, 4, y) || s[4] != '-' || !read_digits(s, 5, 2, m) ||
      s[7] != '-' || !read_digits(s, 8, 2, d)) {
    return std::nullopt;
  }
  CivilDate date{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::optional<seconds> read_clock(std::string_view s, std::size_t pos) {
  int h, mi, se;
  if (!read_digits(s, pos, 2, h) || s[pos + 2] != ':' || !read_digits(s, pos + 3, 2, mi) ||
      s[pos + 5] != ':' || !read_digits(s, pos + 6, 2, se)) {
    return std::nullopt;
  }
  if (h > 23 || mi > 59 || se > 59) return std::nullopt;
  return hours{h} + minutes{mi} + seconds{se};
}

std::string format_with_sep(sys_seconds t, char sep, bool zulu) {
  auto dp = floor<days>(t);
  CivilDate ymd{dp};
  hh_mm_ss hms{t - dp};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u%c%02ld:%02ld:%02ld%s",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), sep,
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()), zulu ? "Z" : "");
  return buf;
}

}  // namespace

std::string format_iso_utc(Instant t) { return format_with_sep(t, 'T', true); }

std::optional<Instant> parse_iso_utc(std::string_view text) {
  if (text.size() != 20 || text[10] != 'T' || text[19] != 'Z') return std::nullopt;
  auto date = read_date(text);
  auto clock = read_clock(text, 11);
  if (!date || !clock) return std::nullopt;
  return Instant{sys_days{*date}} + *clock;
}

std::string format_local(LocalInstant t) {
  return format_with_sep(sys_seconds{t.time_since_epoch()}, ' ', false);
}

std::optional<LocalInstant> parse_local(std::string_view text) {
  if (text.size() != 19 || text[10] != ' ') return std::nullopt;
  auto date = read_date(text);
  auto clock = read_clock(text, 11);
  if (!date || !clock) return std::nullopt;
  return LocalInstant{local_days{*date}} + *clock;
}

std::string format_date(CivilDate d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

std::optional<CivilDate> parse_date(std::string_view text) {
  if (text.size() != 10) return std::nullopt;
  return read_date(text);
}

std::optional<Instant> parse_instant_or_date(std::string_view text) {
  if (auto t = parse_iso_utc(text)) return t;
  if (auto d = parse_date(text)) return Instant{sys_days{*d}};
  return std::nullopt;
}

std::string month_key(Instant t) {
  CivilDate ymd{floor<days>(t)};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()));
  return buf;
}

Instant next_month_start(Instant t) {
  CivilDate ymd{floor<days>(t)};
  year_month ym = ymd.year() / ymd.month() + months{1};
  return Instant{sys_days{ym / day{1}}};
}

CivilDate local_date(Instant utc, int utc_offset_min) {
  return CivilDate{floor<days>(to_local(utc, utc_offset_min))};
}

Instant local_midnight(CivilDate date, int utc_offset_min) {
  return to_utc(LocalInstant{local_days{date}}, utc_offset_min);
}

int local_minute_of_day(Instant utc, int utc_offset_min) {
  auto local = to_local(utc, utc_offset_min);
  auto since = local - floor<days>(local);
  return static_cast<int>(duration_cast<minutes>(since).count());
}

int day_of_year(CivilDate date) {
  auto jan1 = sys_days{date.year() / January / 1};
  return static_cast<int>((sys_days{date} - jan1).count()) + 1;
}

}  // namespace envnet
