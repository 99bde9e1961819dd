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
#include "envnet/formats.hpp"
#include "support/support.hpp"

namespace envnet::formats {
namespace {

const Site kSite{"mata-seca", "Mata Seca", -14.85, -43.97, -180};

std::string wired_file(const std::vector<std::string>& rows, int columns = 3) {
  std::string s = "# PHN-WIRED v1\n# logger_sn=tw-n01\n# columns=" + std::to_string(columns) + "\n";
  s += "ts_local,air_temp,rh,par_in\n";
  for (const auto& r : rows) s += r + "\n";
  return s;
}

std::vector<std::string> clean_rows(int n) {
  std::vector<std::string> rows;
  for (int i = 0; i < n; ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "2024-01-05 %02d:%02d:00,%.1f,60,%d", i / 4, (i % 4) * 15, 20.0 + i * 0.1, i * 10);
    rows.emplace_back(buf);
  }
  return rows;
}

TEST(Formats, DetectsSignatures) {
  EXPECT_EQ(detect_dialect("# PHN-WIRED v1\n"), (Dialect{DialectKind::kWiredLogger, 1}));
  EXPECT_EQ(detect_dialect("# PHN-AGG v1\r\n"), (Dialect{DialectKind::kWirelessAggregator, 1}));
  EXPECT_EQ(detect_dialect("# PHN-NODE v2\n"), (Dialect{DialectKind::kNodeLogger, 2}));
}

TEST(Formats, NoSignatureIsUnknownDialect) {
  try {
    detect_dialect("timestamp,temp\n2024-01-01,3\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownDialect);
  }
  EXPECT_THROW(detect_dialect("# PHN-WIRED v9\n"), Error);
}

TEST(Formats, CleanRowsAllAccepted) {
  auto parsed = parse_file(wired_file(clean_rows(96)), {DialectKind::kWiredLogger, 1}, kSite);
  EXPECT_EQ(parsed.rows.size(), 96u);
  EXPECT_EQ(parsed.report.rows_ok, 96u);
  EXPECT_EQ(parsed.report.rows_rejected, 0u);
  EXPECT_EQ(parsed.rows[0].line_number, 5u);
}

TEST(Formats, ExtraColumnIsArity) {
  auto rows = clean_rows(4);
  rows[2] += ",7";
  auto parsed = parse_file(wired_file(rows), {DialectKind::kWiredLogger, 1}, kSite);
  ASSERT_EQ(parsed.report.errors.size(), 1u);
  const auto& err = parsed.report.errors[0];
  EXPECT_EQ(err.kind, RowErrorKind::kArity);
  EXPECT_EQ(err.line_number, 7u);
  EXPECT_EQ(err.excerpt, rows[2]);
  EXPECT_EQ(err.node_id, "tw-n01");
  EXPECT_EQ(parsed.report.rows_ok, 3u);
}

TEST(Formats, GarbageValueIsCorrupt) {
  auto rows = clean_rows(4);
  rows[1] = "2024-01-05 00:15:00,T@#k,60,10";
  auto parsed = parse_file(wired_file(rows), {DialectKind::kWiredLogger, 1}, kSite);
  ASSERT_EQ(parsed.report.errors.size(), 1u);
  EXPECT_EQ(parsed.report.errors[0].kind, RowErrorKind::kCorruptValue);
  ASSERT_EQ(parsed.rejected_lines.size(), 1u);
  EXPECT_EQ(parsed.rejected_lines[0].second, rows[1]);
}

TEST(Formats, ExcerptCappedAt80Bytes) {
  auto rows = clean_rows(1);
  rows[0] += "," + std::string(200, '9');
  auto parsed = parse_file(wired_file(rows), {DialectKind::kWiredLogger, 1}, kSite);
  ASSERT_EQ(parsed.report.errors.size(), 1u);
  EXPECT_EQ(parsed.report.errors[0].excerpt.size(), 80u);
}

TEST(Formats, PreEpochTimestampIsClockReset) {
  auto rows = clean_rows(2);
  rows[0] = "1980-01-01 00:00:00,20,60,0";
  auto parsed = parse_file(wired_file(rows), {DialectKind::kWiredLogger, 1}, kSite);
  ASSERT_EQ(parsed.report.errors.size(), 1u);
  EXPECT_EQ(parsed.report.errors[0].kind, RowErrorKind::kClockReset);
}

TEST(Formats, MissingTokensAreAbsentValues) {
  auto rows = clean_rows(1);
  rows[0] = "2024-01-05 00:00:00,NA,,5";
  auto parsed = parse_file(wired_file(rows), {DialectKind::kWiredLogger, 1}, kSite);
  ASSERT_EQ(parsed.rows.size(), 1u);
  EXPECT_FALSE(parsed.rows[0].values[0]);
  EXPECT_FALSE(parsed.rows[0].values[1]);
  EXPECT_EQ(parsed.rows[0].values[2], 5.0);
}

TEST(Formats, CrlfLinesParse) {
  std::string text = wired_file(clean_rows(3));
  std::string crlf;
  for (char c : text) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  auto parsed = parse_file(crlf, {DialectKind::kWiredLogger, 1}, kSite);
  EXPECT_EQ(parsed.report.rows_ok, 3u);
}

TEST(Formats, HeaderProblemsAreMalformed) {
  std::string wrong_count = wired_file(clean_rows(1), 4);
  try {
    parse_file(wrong_count, {DialectKind::kWiredLogger, 1}, kSite);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedHeader);
  }
  EXPECT_THROW(parse_file("# PHN-AGG v1\nts_local,a\n", {DialectKind::kWirelessAggregator, 1}, kSite), Error);
  EXPECT_THROW(parse_file("# PHN-NODE v1\nts_local,a\n", {DialectKind::kNodeLogger, 1}, kSite), Error);
}

TEST(Formats, AggregatorEpochIsLocalStandard) {
  std::string text = "# PHN-AGG v1\nepoch_s,node_id,air_temp\n1704412800,us-n01,21\n1704412800,bad id,21\n";
  auto parsed = parse_file(text, {DialectKind::kWirelessAggregator, 1}, kSite);
  ASSERT_EQ(parsed.rows.size(), 1u);
  EXPECT_EQ(parsed.rows[0].node_id, "us-n01");
  EXPECT_EQ(format_iso_utc(to_utc(parsed.rows[0].ts_local, kSite.utc_offset_standard)), "2024-01-05T03:00:00Z");
  ASSERT_EQ(parsed.report.errors.size(), 1u);
  EXPECT_EQ(parsed.report.errors[0].kind, RowErrorKind::kBadNodeId);
}

TEST(Formats, ChecksumRowsVerify) {
  std::string body = "2024-01-05 00:00:00,20,60,0";
  std::string good = finish_row({DialectKind::kWiredLogger, 2}, body);
  EXPECT_EQ(good.size(), body.size() + 3);
  std::string text = "# PHN-WIRED v2\n# logger_sn=tw-n01\n# columns=3\nts_local,air_temp,rh,par_in\n" + good + "\n";
  std::string bad = good;
  bad[body.size() - 1] = '1';
  text += bad + "\n" + body + "\n";
  auto parsed = parse_file(text, {DialectKind::kWiredLogger, 2}, kSite);
  EXPECT_EQ(parsed.report.rows_ok, 1u);
  ASSERT_EQ(parsed.report.errors.size(), 2u);
  EXPECT_EQ(parsed.report.errors[0].kind, RowErrorKind::kChecksum);
  EXPECT_EQ(parsed.report.errors[1].kind, RowErrorKind::kChecksum);
}

TEST(Formats, ParseIsDeterministic) {
  auto text = testing::slurp(testing::fixture_path("golden/agg1/aggregator.csv"));
  auto a = parse_file(text, detect_dialect(text), kSite);
  auto b = parse_file(text, detect_dialect(text), kSite);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].ts_local, b.rows[i].ts_local);
    EXPECT_EQ(a.rows[i].values, b.rows[i].values);
  }
}

TEST(Formats, GoldenFixturesParseClean) {
  for (const char* rel : {"golden/wired1/wired1-n01.csv", "golden/wired2/wired2-n01.csv", "golden/agg1/aggregator.csv",
                          "golden/agg2/aggregator.csv", "golden/node1/node1-n01.csv", "golden/node2/node2-n01.csv"}) {
    auto text = testing::slurp(testing::fixture_path(rel));
    auto parsed = parse_file(text, detect_dialect(text), kSite);
    EXPECT_EQ(parsed.report.rows_rejected, 0u) << rel;
    EXPECT_GT(parsed.report.rows_ok, 90u) << rel;
  }
}

Manifest golden_manifest() {
  return Manifest::from_json(nlohmann::json::parse(testing::slurp(testing::fixture_path("golden/manifest.json"))));
}

TEST(Validate, OutOfRangeFlaggedNotDropped) {
  auto manifest = golden_manifest();
  std::string text =
      "# PHN-NODE v1\n# node_sn=node1-n01\nts_local,par_in,air_temp,rain,leaf_temp\n"
      "2024-01-05 12:00:00,1200,80.0,0,30\n";
  auto parsed = parse_file(text, detect_dialect(text), kSite);
  auto v = validate_structure(parsed, manifest);
  const auto& air = v.records.at("node1-n01.air_temp");
  ASSERT_EQ(air.size(), 1u);
  EXPECT_TRUE(air[0].flags.contains(QualityFlag::kOutOfRange));
  EXPECT_EQ(air[0].eng_value, 80.0);
  const auto& par = v.records.at("node1-n01.par_in");
  EXPECT_TRUE(par[0].flags.empty());
  EXPECT_EQ(par[0].eng_value, 1200.0);
  EXPECT_EQ(format_iso_utc(par[0].ts_utc), "2024-01-05T15:00:00Z");
}

TEST(Validate, UnmappedColumnReportedOthersIngested) {
  auto manifest = golden_manifest();
  std::string text =
      "# PHN-NODE v1\n# node_sn=node1-n01\nts_local,par_in,xtemp9,rain,leaf_temp\n"
      "2024-01-05 12:00:00,1200,25,5,30\n";
  auto parsed = parse_file(text, detect_dialect(text), kSite);
  auto v = validate_structure(parsed, manifest);
  EXPECT_EQ(v.unmapped_columns, (std::vector<std::string>{"xtemp9"}));
  EXPECT_EQ(v.records.count("node1-n01.air_temp"), 0u);
  // Tipping bucket: 5 tips at 0.2 mm.
  EXPECT_DOUBLE_EQ(*v.records.at("node1-n01.rain")[0].eng_value, 1.0);
  EXPECT_EQ(v.records.at("node1-n01.rain")[0].raw_value, 5.0);
}

}  // namespace
}  // namespace envnet::formats
