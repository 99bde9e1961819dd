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

#include <fstream>

#include "envnet/error.hpp"
#include "envnet/store.hpp"
#include "support/support.hpp"

namespace envnet {
namespace {

using testing::TempDir;
using testing::utc;

Manifest one_channel_manifest() {
  Manifest m;
  m.upsert_site(Site{"site", "Site", 0.0, 0.0, 0});
  Deployment d;
  d.deployment_id = "dep";
  d.site_id = "site";
  NodeDescriptor n;
  n.node_id = "dep-n01";
  n.channels.push_back(default_channel(Variable::kAirTemp, Orientation::kNone, "dep-n01.air_temp", "air_temp"));
  n.channels.push_back(default_channel(Variable::kRelHumidity, Orientation::kNone, "dep-n01.rh", "rh"));
  d.nodes.push_back(n);
  m.upsert_deployment(d);
  return m;
}

Store make_store(const TempDir& dir) {
  auto store = Store::open(dir.path(), true);
  auto batch = store.begin_write();
  batch.set_manifest(one_channel_manifest());
  batch.commit();
  return store;
}

std::vector<SensorRecord> day_of_records(Instant start, int n = 96) {
  std::vector<SensorRecord> out;
  for (int i = 0; i < n; ++i) {
    double v = 20.0 + 0.125 * i;
    out.push_back({start + std::chrono::seconds{900 * i}, v, v, {}});
  }
  return out;
}

TEST(Store, CreateEmpty) {
  TempDir dir;
  auto store = Store::open(dir.path(), true);
  EXPECT_TRUE(store.manifest().deployments().empty());
}

TEST(Store, MissingStoreWithoutCreate) {
  TempDir dir;
  try {
    Store::open(dir / "absent", false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotAStore);
  }
}

TEST(Store, ReopenReadsSameManifest) {
  TempDir dir;
  make_store(dir);
  auto again = Store::open(dir.path(), false);
  EXPECT_EQ(again.manifest(), one_channel_manifest());
}

TEST(Store, TruncatedManifestIsCorrupt) {
  TempDir dir;
  make_store(dir);
  auto path = dir / "manifest.json";
  auto bytes = testing::slurp(path);
  std::ofstream(path, std::ios::binary | std::ios::trunc) << bytes.substr(0, bytes.size() / 2);
  try {
    Store::open(dir.path(), false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorruptManifest);
    EXPECT_NE(std::string(e.what()).find("manifest.json"), std::string::npos);
  }
}

TEST(Store, AppendFreshRecords) {
  TempDir dir;
  auto store = make_store(dir);
  auto recs = day_of_records(utc("2024-01-01T00:00:00Z"));
  auto r = store.append_records("dep-n01.air_temp", recs);
  EXPECT_EQ(r.written, 96u);
  EXPECT_EQ(r.duplicates, 0u);
}

TEST(Store, ReappendIsIdempotent) {
  TempDir dir;
  auto store = make_store(dir);
  auto recs = day_of_records(utc("2024-01-01T00:00:00Z"));
  store.append_records("dep-n01.air_temp", recs);
  auto before = testing::snapshot(dir.path());
  auto r = store.append_records("dep-n01.air_temp", recs);
  EXPECT_EQ(r.written, 0u);
  EXPECT_EQ(r.duplicates, 96u);
  EXPECT_EQ(testing::snapshot(dir.path()), before);
}

TEST(Store, PartialOverlapWritesSetDifference) {
  TempDir dir;
  auto store = make_store(dir);
  auto recs = day_of_records(utc("2024-01-01T00:00:00Z"));
  std::vector<SensorRecord> three = {recs[5], recs[40], recs[90]};
  store.append_records("dep-n01.air_temp", three);
  auto r = store.append_records("dep-n01.air_temp", recs);
  EXPECT_EQ(r.written, 93u);
  EXPECT_EQ(r.duplicates, 3u);
}

TEST(Store, ReadYourWrites) {
  TempDir dir;
  auto store = make_store(dir);
  // Spans a month boundary.
  auto recs = day_of_records(utc("2024-01-31T12:00:00Z"));
  store.append_records("dep-n01.air_temp", recs);
  auto back = store.read_records("dep-n01.air_temp", utc("2024-01-01T00:00:00Z"), utc("2024-03-01T00:00:00Z"));
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_EQ(back[i], quantize(recs[i]));
  EXPECT_EQ(store.channel_months("dep-n01.air_temp"), (std::vector<std::string>{"2024-01", "2024-02"}));
}

TEST(Store, RangesAreHalfOpen) {
  TempDir dir;
  auto store = make_store(dir);
  auto t0 = utc("2024-01-01T00:00:00Z");
  store.append_records("dep-n01.air_temp", day_of_records(t0));
  EXPECT_TRUE(store.read_records("dep-n01.air_temp", t0, t0).empty());
  auto one = store.read_records("dep-n01.air_temp", t0, t0 + std::chrono::seconds{900});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].ts_utc, t0);
}

TEST(Store, UnsortedInputRejected) {
  TempDir dir;
  auto store = make_store(dir);
  auto recs = day_of_records(utc("2024-01-01T00:00:00Z"), 3);
  std::swap(recs[0], recs[2]);
  try {
    store.append_records("dep-n01.air_temp", recs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsortedInput);
  }
}

TEST(Store, UnknownChannel) {
  TempDir dir;
  auto store = make_store(dir);
  try {
    store.append_records("nope", day_of_records(utc("2024-01-01T00:00:00Z"), 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownChannel);
  }
}

TEST(Store, ValuesPersistWithSixSignificantDigits) {
  EXPECT_EQ(format_value(21.5), "21.5");
  EXPECT_EQ(format_value(1234.5678), "1234.57");
  SensorRecord r{utc("2024-01-01T00:00:00Z"), std::nullopt, 3.0, {QualityFlag::kOutOfRange}};
  auto line = format_record_line(r);
  EXPECT_EQ(line, "2024-01-01T00:00:00Z,,3,OUT_OF_RANGE");
  EXPECT_EQ(parse_record_line(line), r);
  EXPECT_FALSE(parse_record_line("2024-01-01T00:00:00Z,1,2"));
}

TEST(Store, UncommittedBatchLeavesNoTrace) {
  TempDir dir;
  auto store = make_store(dir);
  auto before = testing::snapshot(dir.path());
  {
    auto batch = store.begin_write();
    auto recs = day_of_records(utc("2024-01-01T00:00:00Z"));
    batch.append("dep-n01.air_temp", recs);
  }
  EXPECT_EQ(testing::snapshot(dir.path()), before);
  EXPECT_TRUE(store.read_records("dep-n01.air_temp", utc("2024-01-01T00:00:00Z"), utc("2024-02-01T00:00:00Z"))
                  .empty());
}

TEST(Store, BatchCommitsSeveralChannelsTogether) {
  TempDir dir;
  auto store = make_store(dir);
  std::vector<std::string> phases;
  store.set_write_hook([&](std::string_view phase, std::size_t) { phases.emplace_back(phase); });
  auto batch = store.begin_write();
  auto recs = day_of_records(utc("2024-01-01T00:00:00Z"), 4);
  batch.append("dep-n01.air_temp", recs);
  batch.append("dep-n01.rh", recs);
  batch.append_ledger_line("{}");
  batch.commit();
  EXPECT_EQ(std::count(phases.begin(), phases.end(), "commit"), 1);
  EXPECT_GE(std::count(phases.begin(), phases.end(), "stage"), 3);
  EXPECT_EQ(store.read_records("dep-n01.rh", utc("2024-01-01T00:00:00Z"), utc("2024-01-02T00:00:00Z")).size(), 4u);
  EXPECT_EQ(store.read_file("provenance.jsonl"), std::optional<std::string>("{}\n"));
}

TEST(Store, ReplaceRangeKeepsOutsideRecords) {
  TempDir dir;
  auto store = make_store(dir);
  auto t0 = utc("2024-01-01T00:00:00Z");
  store.append_records("dep-n01.air_temp", day_of_records(t0, 8));
  auto batch = store.begin_write();
  std::vector<SensorRecord> repl = {{t0 + std::chrono::seconds{60}, 1.0, 1.0, {}}};
  batch.replace_range("dep-n01.air_temp", t0 + std::chrono::seconds{900}, t0 + std::chrono::seconds{2700}, repl);
  batch.commit();
  auto back = store.read_records("dep-n01.air_temp", t0, t0 + std::chrono::hours{24});
  ASSERT_EQ(back.size(), 7u);
  EXPECT_EQ(back[1].ts_utc, t0 + std::chrono::seconds{60});
}

}  // namespace
}  // namespace envnet
