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

#include <gtest/gtest.h>

#include "envnet/time.hpp"
#include "support/support.hpp"

namespace envnet {
namespace {

using testing::utc;
using testing::ymd;

TEST(Time, IsoRoundTrip) {
  auto t = parse_iso_utc("2024-02-29T23:59:59Z");
  ASSERT_TRUE(t);
  EXPECT_EQ(format_iso_utc(*t), "2024-02-29T23:59:59Z");
  EXPECT_EQ(to_epoch(*parse_iso_utc("1970-01-01T00:00:00Z")), 0);
}

TEST(Time, RejectsMalformedIso) {
  EXPECT_FALSE(parse_iso_utc("2024-02-30T00:00:00Z"));
  EXPECT_FALSE(parse_iso_utc("2024-01-01 00:00:00"));
  EXPECT_FALSE(parse_iso_utc("2024-01-01T24:00:00Z"));
  EXPECT_FALSE(parse_iso_utc(""));
}

TEST(Time, LocalTextRoundTrip) {
  auto t = parse_local("2023-10-05 06:15:00");
  ASSERT_TRUE(t);
  EXPECT_EQ(format_local(*t), "2023-10-05 06:15:00");
  EXPECT_FALSE(parse_local("2023-10-05T06:15:00"));
}

TEST(Time, InstantOrDate) {
  EXPECT_EQ(parse_instant_or_date("2024-03-01"), parse_iso_utc("2024-03-01T00:00:00Z"));
  EXPECT_FALSE(parse_instant_or_date("2024-3-1"));
}

TEST(Time, LocalConversionUsesStandardOffset) {
  auto local = *parse_local("2024-01-01 00:30:00");
  EXPECT_EQ(format_iso_utc(to_utc(local, -180)), "2024-01-01T03:30:00Z");
  EXPECT_EQ(to_local(to_utc(local, 330), 330), local);
}

TEST(Time, LocalDateAndMinute) {
  auto t = utc("2024-01-01T02:00:00Z");
  EXPECT_EQ(local_date(t, -180), ymd(2023, 12, 31));
  EXPECT_EQ(local_minute_of_day(t, -180), 23 * 60);
  EXPECT_EQ(local_midnight(ymd(2024, 1, 1), -180), utc("2024-01-01T03:00:00Z"));
}

TEST(Time, MonthKeys) {
  EXPECT_EQ(month_key(utc("2024-12-31T23:59:59Z")), "2024-12");
  EXPECT_EQ(next_month_start(utc("2024-12-15T10:00:00Z")), utc("2025-01-01T00:00:00Z"));
}

TEST(Time, DayOfYear) {
  EXPECT_EQ(day_of_year(ymd(2024, 1, 1)), 1);
  EXPECT_EQ(day_of_year(ymd(2024, 12, 31)), 366);
  EXPECT_EQ(day_of_year(ymd(2023, 12, 31)), 365);
}

}  // namespace
}  // namespace envnet
