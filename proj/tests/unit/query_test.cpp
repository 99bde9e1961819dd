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

#include <cmath>
#include <random>

#include "envnet/error.hpp"
#include "envnet/query.hpp"
#include "envnet/simgen.hpp"
#include "query_oracle.hpp"
#include "support/support.hpp"

namespace envnet::query {
namespace {

using envnet::testing::TempDir;
using envnet::testing::utc;

// One understory node with air temperature and incoming PAR, local UTC-3.
class QueryFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    Manifest m;
    m.upsert_site(Site{"site", "Site", -14.85, -43.97, -180});
    Deployment d;
    d.deployment_id = "dep";
    d.site_id = "site";
    NodeDescriptor n;
    n.node_id = "dep-n01";
    n.channels.push_back(default_channel(Variable::kAirTemp, Orientation::kNone, "dep-n01.air_temp", "air_temp"));
    n.channels.push_back(default_channel(Variable::kPar, Orientation::kIncoming, "dep-n01.par_in", "par_in"));
    d.nodes.push_back(n);
    m.upsert_deployment(d);
    store_.emplace(Store::open(dir_.path(), true));
    auto b = store_->begin_write();
    b.set_manifest(m);
    b.commit();
  }

  void fill(const std::string& channel, Instant from, int n, const std::function<double(int)>& value,
            const std::function<FlagSet(int)>& flags = {}) {
    std::vector<SensorRecord> recs;
    for (int i = 0; i < n; ++i) {
      double v = value(i);
      recs.push_back({from + std::chrono::seconds{900 * i}, v, v, flags ? flags(i) : FlagSet{}});
    }
    store_->append_records(channel, recs);
  }

  TempDir dir_;
  std::optional<Store> store_;
  const Instant day0_ = utc("2024-01-05T03:00:00Z");  // local midnight
};

TEST_F(QueryFixture, ConstantSeriesDailyMean) {
  fill("dep-n01.air_temp", day0_, 96 * 3, [](int) { return 21.5; });
  QuerySpec q;
  q.channels = {"dep-n01.air_temp"};
  q.from = day0_;
  q.to = day0_ + std::chrono::days{3};
  q.agg = Aggregation{BinSize::kDay, Stat::kMean};
  auto out = run_query(*store_, q);
  ASSERT_EQ(out.size(), 1u);
  ASSERT_EQ(out[0].points.size(), 3u);
  for (const auto& p : out[0].points) {
    EXPECT_EQ(p.value, 21.5);
    EXPECT_EQ(p.count, 96u);
  }
  EXPECT_EQ(out[0].points[1].ts, day0_ + std::chrono::days{1});
}

TEST_F(QueryFixture, ParGateKeepsClearSkyOnly) {
  fill("dep-n01.air_temp", day0_, 2, [](int) { return 30.0; });
  fill("dep-n01.par_in", day0_, 2, [](int i) { return i == 0 ? 950.0 : 850.0; });
  QuerySpec q;
  q.channels = {"dep-n01.air_temp"};
  q.from = day0_;
  q.to = day0_ + std::chrono::hours{1};
  q.clear_sky_par_min = 900.0;
  auto out = run_query(*store_, q);
  ASSERT_EQ(out[0].points.size(), 1u);
  EXPECT_EQ(out[0].points[0].ts, day0_);
}

TEST_F(QueryFixture, MiddayWindowAtMostSixteenPerDay) {
  fill("dep-n01.air_temp", day0_, 96 * 5, [](int i) { return 20.0 + i % 7; });
  QuerySpec q;
  q.channels = {"dep-n01.air_temp"};
  q.from = day0_;
  q.to = day0_ + std::chrono::days{5};
  q.tod_window = TodWindow{600, 840};
  q.agg = Aggregation{BinSize::kDay, Stat::kCount};
  auto out = run_query(*store_, q);
  ASSERT_EQ(out[0].points.size(), 5u);
  for (const auto& p : out[0].points) EXPECT_LE(p.count, 16u);
  EXPECT_EQ(out[0].points[0].count, 16u);
}

TEST_F(QueryFixture, DefaultExclusionsDropFlaggedRecords) {
  fill("dep-n01.air_temp", day0_, 4, [](int i) { return 10.0 * i; },
       [](int i) { return i == 1 ? FlagSet{QualityFlag::kOutOfRange} : FlagSet{}; });
  QuerySpec q;
  q.channels = {"dep-n01.air_temp"};
  q.from = day0_;
  q.to = day0_ + std::chrono::hours{1};
  EXPECT_EQ(run_query(*store_, q)[0].points.size(), 3u);
  q.exclude_flagged = {};
  EXPECT_EQ(run_query(*store_, q)[0].points.size(), 4u);
}

TEST_F(QueryFixture, EmptyBinsPresentWithZeroCount) {
  fill("dep-n01.air_temp", day0_, 4, [](int) { return 1.0; });
  QuerySpec q;
  q.channels = {"dep-n01.air_temp"};
  q.from = day0_;
  q.to = day0_ + std::chrono::hours{3};
  q.agg = Aggregation{BinSize::kHour, Stat::kMax};
  auto out = run_query(*store_, q);
  ASSERT_EQ(out[0].points.size(), 3u);
  EXPECT_EQ(out[0].points[0].count, 4u);
  EXPECT_EQ(out[0].points[1].count, 0u);
  EXPECT_FALSE(out[0].points[1].value);
}

TEST_F(QueryFixture, ValueBoundsByVariableName) {
  fill("dep-n01.air_temp", day0_, 8, [](int i) { return static_cast<double>(i); });
  QuerySpec q;
  q.channels = {"dep-n01.air_temp"};
  q.from = day0_;
  q.to = day0_ + std::chrono::hours{2};
  q.value_bounds["air_temp_C"] = {2.0, 5.0};
  EXPECT_EQ(run_query(*store_, q)[0].points.size(), 4u);
}

TEST_F(QueryFixture, Errors) {
  QuerySpec q;
  q.from = day0_;
  q.to = day0_ + std::chrono::hours{1};
  try {
    run_query(*store_, q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptySpec);
  }
  q.channels = {"nope"};
  try {
    run_query(*store_, q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownChannel);
  }
  q.channels = {"dep-n01.air_temp"};
  std::swap(q.from, q.to);
  try {
    run_query(*store_, q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvertedRange);
  }
}

TEST_F(QueryFixture, ThirtyDayDailyMeanMatchesBruteForce) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 40.0);
  std::vector<double> values(96 * 30);
  for (auto& v : values) v = u(rng);
  fill("dep-n01.air_temp", day0_, static_cast<int>(values.size()), [&](int i) { return values[i]; });
  QuerySpec q;
  q.channels = {"dep-n01.air_temp"};
  q.from = day0_;
  q.to = day0_ + std::chrono::days{30};
  q.agg = Aggregation{BinSize::kDay, Stat::kMean};
  auto out = run_query(*store_, q);
  oracle::ChannelInfo ch{"dep-n01.air_temp", "air_temp_C", -180, "dep-n01.par_in", 900};
  oracle::Filters f;
  f.from = to_epoch(q.from);
  f.to = to_epoch(q.to);
  f.exclude = {"OUT_OF_RANGE", "MISSING", "DUPLICATE"};
  auto rows = oracle::scan_channel(dir_.path(), ch.channel_id);
  auto expect = oracle::aggregated(oracle::filtered(rows, {}, ch, f), ch, f, oracle::Bin::kDay, oracle::Stat::kMean);
  ASSERT_EQ(out[0].points.size(), expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) {
    EXPECT_EQ(to_epoch(out[0].points[i].ts), expect[i].t);
    EXPECT_NEAR(*out[0].points[i].value, *expect[i].value, 1e-12 * std::abs(*expect[i].value));
  }
}

TEST(QueryBins, LocalStandardBoundaries) {
  auto t = utc("2024-01-05T02:30:00Z");
  EXPECT_EQ(bin_start(t, BinSize::kDay, -180), utc("2024-01-04T03:00:00Z"));
  EXPECT_EQ(bin_start(t, BinSize::kHour, 330), utc("2024-01-05T02:30:00Z"));
  EXPECT_EQ(bin_start(t, BinSize::kMonth, -180), utc("2024-01-01T03:00:00Z"));
  EXPECT_EQ(next_bin(utc("2024-01-01T03:00:00Z"), BinSize::kMonth, -180), utc("2024-02-01T03:00:00Z"));
}

TEST(QueryBins, TodWindowWraps) {
  TodWindow w{1380, 60};
  EXPECT_TRUE(w.contains(1400));
  EXPECT_TRUE(w.contains(0));
  EXPECT_FALSE(w.contains(60));
  EXPECT_FALSE(w.contains(600));
}

TEST(QueryParams, ParseMiddayQuery) {
  ParamMap p{{"channels", "a,b"}, {"from", "2024-01-01"}, {"to", "2024-02-01"}, {"tod", "10:00-14:00"},
             {"par_min", "900"}, {"agg", "day:mean"}};
  auto q = parse_query_params(p);
  EXPECT_EQ(q.channels, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(q.tod_window, (TodWindow{600, 840}));
  EXPECT_EQ(q.clear_sky_par_min, 900.0);
  EXPECT_EQ(q.agg, (Aggregation{BinSize::kDay, Stat::kMean}));
  EXPECT_EQ(parse_query_params(to_query_params(q)), q);
}

TEST(QueryParams, RoundTripRandomSpecs) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 200; ++k) {
    QuerySpec q;
    q.channels = {"c" + std::to_string(rng() % 5)};
    q.from = from_epoch(1700000000 + static_cast<std::int64_t>(rng() % 100000));
    q.to = q.from + std::chrono::seconds{rng() % 100000};
    if (rng() % 2) q.tod_window = TodWindow{static_cast<int>(rng() % 1440), static_cast<int>(rng() % 1441)};
    if (rng() % 2) q.value_bounds["air_temp_C"] = {-1.0 / 3.0, 1e5 / 7.0};
    if (rng() % 2) q.exclude_flagged = FlagSet{QualityFlag::kSuspectDrift};
    if (rng() % 2) q.clear_sky_par_min = std::ldexp(static_cast<double>(rng() % 100000), -7);
    if (rng() % 2) q.agg = Aggregation{BinSize::kHour, Stat::kMin};
    q.raw_values = rng() % 2;
    EXPECT_EQ(parse_query_params(to_query_params(q)), q);
  }
}

TEST(QueryParams, Rejections) {
  auto code = [](const ParamMap& p) {
    try {
      parse_query_params(p);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code({{"channels", "a"}, {"from", "2024-01-01"}, {"to", "2024-01-02"}, {"colour", "red"}}),
            ErrorCode::kUnknownParameter);
  EXPECT_EQ(code({{"channels", "a"}, {"from", "2024-01-02"}, {"to", "2024-01-01"}}), ErrorCode::kInvertedRange);
  EXPECT_EQ(code({{"channels", "a"}, {"from", "yesterday"}, {"to", "2024-01-01"}}), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code({{"from", "2024-01-01"}, {"to", "2024-01-02"}}), ErrorCode::kEmptySpec);
}

}  // namespace
}  // namespace envnet::query
