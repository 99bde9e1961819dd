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

#include "envnet/error.hpp"
#include "envnet/health.hpp"
#include "envnet/simgen.hpp"
#include "support/support.hpp"

namespace envnet::health {
namespace {

using envnet::testing::TempDir;
using envnet::testing::utc;
using nlohmann::json;

class GapFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    out_ = simgen::generate(simgen::spec_from_json(
        testing::sim_spec(3, "2024-01-05T03:00:00Z", 1, {testing::understory_deployment("us", 1, {"air_temp"})})));
    store_.emplace(Store::open(dir_.path(), true));
    auto b = store_->begin_write();
    b.set_manifest(out_.manifest);
    b.commit();
  }
  void put(std::vector<Instant> ts, FlagSet flags = {}) {
    std::vector<SensorRecord> recs;
    for (auto t : ts) recs.push_back({t, 20.0, 20.0, flags});
    store_->append_records("us-n01.air_temp", recs);
  }
  TempDir dir_;
  simgen::SimOutput out_;
  std::optional<Store> store_;
  const Instant t0_ = utc("2024-01-05T00:00:00Z");
};

TEST_F(GapFixture, CompleteDay) {
  std::vector<Instant> ts;
  for (int i = 0; i < 96; ++i) ts.push_back(t0_ + std::chrono::seconds{900 * i});
  put(ts);
  auto r = detect_gaps(*store_, "us-n01.air_temp", t0_, t0_ + std::chrono::days{1}, 900);
  EXPECT_EQ(r.expected, 96);
  EXPECT_EQ(r.present, 96);
  EXPECT_TRUE(r.gaps.empty());
  EXPECT_EQ(r.uptime_fraction, 1.0);
}

TEST_F(GapFixture, MorningHole) {
  std::vector<Instant> ts;
  for (int i = 0; i < 96; ++i) {
    auto t = t0_ + std::chrono::seconds{900 * i};
    if (t > t0_ + std::chrono::minutes{9 * 60 + 45} && t < t0_ + std::chrono::hours{12}) continue;
    ts.push_back(t);
  }
  put(ts);
  auto r = detect_gaps(*store_, "us-n01.air_temp", t0_, t0_ + std::chrono::days{1}, 900);
  ASSERT_EQ(r.gaps.size(), 1u);
  EXPECT_EQ(r.gaps[0].start, t0_ + std::chrono::hours{10});
  EXPECT_EQ(r.gaps[0].end, t0_ + std::chrono::minutes{11 * 60 + 45});
  EXPECT_EQ(r.gaps[0].missing_count, 8);
  EXPECT_EQ(r.present + r.gaps[0].missing_count, r.expected);
}

TEST_F(GapFixture, EmptyChannel) {
  auto r = detect_gaps(*store_, "us-n01.air_temp", t0_, t0_ + std::chrono::days{1}, 900);
  ASSERT_EQ(r.gaps.size(), 1u);
  EXPECT_EQ(r.gaps[0].missing_count, 96);
  EXPECT_EQ(r.uptime_fraction, 0.0);
}

TEST_F(GapFixture, JitteredSamplesStillFill) {
  put({t0_ + std::chrono::seconds{300}, t0_ + std::chrono::seconds{900 + 449}});
  auto r = detect_gaps(*store_, "us-n01.air_temp", t0_, t0_ + std::chrono::seconds{1800}, 900);
  EXPECT_EQ(r.present, 2);
}

TEST_F(GapFixture, MissingFlaggedRecordsDoNotCount) {
  put({t0_}, FlagSet{QualityFlag::kMissing});
  auto r = detect_gaps(*store_, "us-n01.air_temp", t0_, t0_ + std::chrono::seconds{900}, 900);
  EXPECT_EQ(r.present, 0);
}

TEST_F(GapFixture, Errors) {
  auto code = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kIo;
  };
  EXPECT_EQ(code([&] { detect_gaps(*store_, "nope", t0_, t0_ + std::chrono::hours{1}, 900); }),
            ErrorCode::kUnknownChannel);
  EXPECT_EQ(code([&] { detect_gaps(*store_, "us-n01.air_temp", t0_ + std::chrono::hours{1}, t0_, 900); }),
            ErrorCode::kInvertedRange);
  EXPECT_EQ(code([&] { detect_gaps(*store_, "us-n01.air_temp", t0_, t0_ + std::chrono::hours{1}, 0); }),
            ErrorCode::kBadParams);
}

class NodeHealthFixture : public ::testing::Test {
 protected:
  void load(std::vector<json> faults, int days = 30) {
    out_ = simgen::generate(simgen::spec_from_json(testing::sim_spec(
        4, "2024-01-05T03:00:00Z", days, {testing::understory_deployment("us", 12, {"air_temp", "rh"})},
        std::move(faults))));
    store_.emplace(Store::open(dir_.path(), true));
    results_ = testing::load_simulation(*store_, out_);
  }
  TempDir dir_;
  simgen::SimOutput out_;
  std::optional<Store> store_;
  std::vector<ingest::IngestResult> results_;
  const Instant t0_ = utc("2024-01-05T03:00:00Z");
};

TEST_F(NodeHealthFixture, CleanDeployment) {
  load({}, 3);
  auto nodes = node_health_summary(*store_, "us", t0_, t0_ + std::chrono::days{3});
  ASSERT_EQ(nodes.size(), 12u);
  for (const auto& n : nodes) {
    EXPECT_EQ(n.uptime_fraction, 1.0);
    EXPECT_EQ(n.reject_rate, 0.0);
  }
}

TEST_F(NodeHealthFixture, TwoDayOutage) {
  load({{{"kind", "GAP"}, {"target", "us-n07"}, {"from", "2024-01-10T03:00:00Z"}, {"to", "2024-01-12T03:00:00Z"}}});
  auto nodes = node_health_summary(*store_, "us", t0_, t0_ + std::chrono::days{30});
  EXPECT_EQ(nodes.front().node_id, "us-n07");
  EXPECT_NEAR(nodes.front().uptime_fraction, 28.0 / 30.0, 1e-12);
  EXPECT_EQ(nodes[1].uptime_fraction, 1.0);
}

TEST_F(NodeHealthFixture, MalformedNodeCarriesSuspect) {
  load({{{"kind", "MALFORMED_ROWS_PCT"}, {"target", "us-n03"}, {"magnitude", 30}}}, 5);
  auto nodes = node_health_summary(*store_, "us", t0_, t0_ + std::chrono::days{5});
  EXPECT_EQ(nodes.front().node_id, "us-n03");
  EXPECT_NEAR(nodes.front().reject_rate, 0.30, 0.005);
  EXPECT_TRUE(nodes.front().deployment_suspect);
  EXPECT_EQ(nodes[1].reject_rate, 0.0);
}

TEST_F(NodeHealthFixture, UnknownDeployment) {
  load({}, 1);
  try {
    node_health_summary(*store_, "nope", t0_, t0_ + std::chrono::days{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownDeployment);
  }
}

}  // namespace
}  // namespace envnet::health
