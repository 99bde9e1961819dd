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

#include "envnet/error.hpp"
#include "envnet/simgen.hpp"
#include "envnet/timecal.hpp"
#include "support/support.hpp"

namespace envnet::simgen {
namespace {

using envnet::testing::utc;
using nlohmann::json;

TEST(PlaceNodes, Transect) {
  StrategyParams p;
  p.spacing_m = 10;
  auto xy = place_nodes(Strategy::kTransect, p, 5);
  ASSERT_EQ(xy.size(), 5u);
  for (int k = 0; k < 5; ++k) {
    EXPECT_EQ(xy[k].first, 10.0 * k);
    EXPECT_EQ(xy[k].second, 0.0);
  }
}

TEST(PlaceNodes, Star) {
  StrategyParams p;
  p.radii = {10, 20};
  auto xy = place_nodes(Strategy::kStar, p, 12);
  ASSERT_EQ(xy.size(), 12u);
  int inner = 0, outer = 0;
  for (auto [x, y] : xy) {
    double r = std::hypot(x, y);
    if (std::abs(r - 10) < 1e-9) ++inner;
    if (std::abs(r - 20) < 1e-9) ++outer;
  }
  EXPECT_EQ(inner, 6);
  EXPECT_EQ(outer, 6);
}

TEST(PlaceNodes, Grid) {
  StrategyParams p;
  p.rows = 3;
  p.cols = 4;
  p.spacing_m = 15;
  auto xy = place_nodes(Strategy::kGrid, p, 12);
  ASSERT_EQ(xy.size(), 12u);
  for (auto [x, y] : xy) {
    EXPECT_EQ(std::fmod(x, 15.0), 0.0);
    EXPECT_EQ(std::fmod(y, 15.0), 0.0);
  }
  try {
    place_nodes(Strategy::kGrid, p, 11);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadParams);
  }
}

SimSpec equator_spec() {
  auto j = testing::sim_spec(1, "2024-03-20T00:00:00Z", 1, {testing::tower_deployment("tw")});
  j["site"]["latitude"] = 0.0;
  j["site"]["longitude"] = 0.0;
  j["site"]["utc_offset_standard"] = 0;
  return spec_from_json(j);
}

TEST(ClearSky, NoonAndMidnight) {
  auto spec = equator_spec();
  auto noon = clear_sky(spec, utc("2024-03-20T12:07:00Z"));
  EXPECT_NEAR(noon.par_in, spec.par_max, 0.01 * spec.par_max);
  EXPECT_EQ(clear_sky(spec, utc("2024-03-20T00:00:00Z")).par_in, 0.0);
}

TEST(ClearSky, LightStartsAtModelSunrise) {
  auto spec = equator_spec();
  double sunrise = timecal::expected_sunrise(0, 0, 0, testing::ymd(2024, 3, 20));
  auto before = utc("2024-03-20T00:00:00Z") + std::chrono::seconds{static_cast<int>(sunrise * 60) - 60};
  auto after = before + std::chrono::seconds{120};
  EXPECT_EQ(clear_sky(spec, before).par_in, 0.0);
  EXPECT_GT(clear_sky(spec, after).par_in, 0.0);
}

TEST(Generate, Deterministic) {
  auto spec = spec_from_json(testing::sim_spec(
      77, "2024-01-05T03:00:00Z", 2,
      {testing::tower_deployment("tw"), testing::understory_deployment("us", 12, {"par_in", "air_temp"})},
      {{{"kind", "MALFORMED_ROWS_PCT"}, {"target", "us"}, {"magnitude", 5}}}));
  auto a = generate(spec);
  auto b = generate(spec);
  EXPECT_EQ(a.files, b.files);
  EXPECT_EQ(a.truth.to_json(), b.truth.to_json());
  spec.seed = 78;
  EXPECT_NE(generate(spec).files, a.files);
}

TEST(Generate, ClockOffsetShiftsEveryTimestamp) {
  auto clean = generate(spec_from_json(testing::sim_spec(5, "2024-01-05T03:00:00Z", 1, {testing::tower_deployment("tw")})));
  auto shifted = generate(spec_from_json(testing::sim_spec(
      5, "2024-01-05T03:00:00Z", 1, {testing::tower_deployment("tw")},
      {{{"kind", "CLOCK_OFFSET_H"}, {"target", "*"}, {"magnitude", 1}}})));
  const auto& a = clean.files.begin()->second;
  const auto& b = shifted.files.begin()->second;
  auto first_ts = [](const std::string& text) {
    auto pos = text.find("\nts_local");
    pos = text.find('\n', pos + 1) + 1;
    return *parse_local(text.substr(pos, 19));
  };
  EXPECT_EQ(first_ts(b) - first_ts(a), std::chrono::hours{1});
  ASSERT_EQ(shifted.truth.clocks.size(), 1u);
  EXPECT_EQ(shifted.truth.clocks[0].magnitude, 1.0);
}

TEST(Generate, MalformedCountMatchesPercent) {
  auto out = generate(spec_from_json(testing::sim_spec(
      5, "2024-01-05T03:00:00Z", 10, {testing::tower_deployment("tw")},
      {{{"kind", "MALFORMED_ROWS_PCT"}, {"target", "*"}, {"magnitude", 10}}})));
  EXPECT_EQ(out.truth.malformed.size(), 96u);
  EXPECT_EQ(out.truth.data_rows.begin()->second, 960u);
}

TEST(Generate, TruthJsonRoundTrip) {
  auto out = generate(spec_from_json(testing::sim_spec(
      5, "2024-01-05T03:00:00Z", 2, {testing::understory_deployment("us", 2, {"air_temp"})},
      {{{"kind", "GAP"}, {"target", "us-n01"}, {"from", "2024-01-05T06:00:00Z"}, {"to", "2024-01-05T08:00:00Z"}},
       {{"kind", "COLUMN_ARITY"}, {"target", "us"}, {"magnitude", 3}}})));
  auto back = GroundTruth::from_json(out.truth.to_json());
  EXPECT_EQ(back.to_json(), out.truth.to_json());
  ASSERT_EQ(out.truth.gaps.size(), 1u);
  EXPECT_EQ(out.truth.gaps[0].missing_count, 8);
  EXPECT_EQ(out.truth.gaps[0].start, utc("2024-01-05T06:00:00Z"));
  EXPECT_EQ(out.truth.gaps[0].end, utc("2024-01-05T07:45:00Z"));
}

TEST(Generate, SpecValidation) {
  auto bad = testing::sim_spec(5, "2024-01-05T03:00:00Z", 1, {testing::tower_deployment("tw")},
                               {{{"kind", "GAP"}, {"target", "ghost"}}});
  EXPECT_THROW(spec_from_json(bad), Error);
  auto j = testing::sim_spec(5, "2024-01-05T03:00:00Z", 1, {testing::tower_deployment("tw")});
  j["deployments"][0]["columns"].push_back("wind");
  EXPECT_THROW(spec_from_json(j), Error);
  auto spec = spec_from_json(testing::sim_spec(5, "2024-01-05T03:00:00Z", 1, {testing::tower_deployment("tw")}));
  EXPECT_EQ(to_json(spec_from_json(to_json(spec))), to_json(spec));
}

}  // namespace
}  // namespace envnet::simgen
