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

#include "envnet/formats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "envnet/convert.hpp"
#include "envnet/error.hpp"

namespace envnet::formats {

namespace {

constexpr std::size_t kDetectWindow = 4096;
constexpr std::size_t kExcerptBytes = 80;
// Loggers whose clock lost power restart near their firmware epoch.
constexpr std::int64_t kEarliestPlausibleUtc = 946684800;  // 2000-01-01T00:00:00Z

struct Signature {
  DialectKind kind;
  std::string_view tag;
};

constexpr Signature kSignatures[] = {
    {DialectKind::kWiredLogger, "# PHN-WIRED v"},
    {DialectKind::kWirelessAggregator, "# PHN-AGG v"},
    {DialectKind::kNodeLogger, "# PHN-NODE v"},
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string_view strip_bom(std::string_view s) {
  if (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xEF && static_cast<unsigned char>(s[1]) == 0xBB &&
      static_cast<unsigned char>(s[2]) == 0xBF) {
    s.remove_prefix(3);
  }
  return s;
}

struct Line {
  std::size_t number;
  std::string_view text;
};

std::vector<Line> split_lines(std::string_view bytes) {
  std::vector<Line> lines;
  std::size_t pos = 0, number = 1;
  while (pos < bytes.size()) {
    auto nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) nl = bytes.size();
    auto text = bytes.substr(pos, nl - pos);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    lines.push_back({number++, text});
    pos = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> split_csv(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto comma = s.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

std::optional<int> parse_version(std::string_view digits) {
  if (digits.empty() || digits.size() > 3) return std::nullopt;
  int v = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return v;
}

bool is_missing_token(std::string_view s) { return s.empty() || s == "NA" || s == "NAN" || s == "NaN"; }

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == '.';
  });
}

std::optional<std::int64_t> parse_epoch(std::string_view s) {
  if (s.empty() || s.size() > 12) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 0) return std::nullopt;
  return v;
}

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::kMalformedHeader, what); }

std::string excerpt(std::string_view line) { return std::string(line.substr(0, kExcerptBytes)); }

}  // namespace

std::string_view dialect_name(DialectKind kind) {
  switch (kind) {
    case DialectKind::kWiredLogger: return "WIRED_LOGGER";
    case DialectKind::kWirelessAggregator: return "WIRELESS_AGGREGATOR";
    case DialectKind::kNodeLogger: return "NODE_LOGGER";
  }
  return "UNKNOWN";
}

std::optional<DialectKind> parse_dialect_name(std::string_view name) {
  for (auto k : {DialectKind::kWiredLogger, DialectKind::kWirelessAggregator, DialectKind::kNodeLogger}) {
    if (dialect_name(k) == name) return k;
  }
  return std::nullopt;
}

std::string dialect_signature(Dialect d) {
  for (const auto& sig : kSignatures) {
    if (sig.kind == d.kind) return std::string(sig.tag) + std::to_string(d.version);
  }
  return {};
}

std::string_view row_error_name(RowErrorKind kind) {
  switch (kind) {
    case RowErrorKind::kArity: return "ARITY";
    case RowErrorKind::kCorruptValue: return "CORRUPT_VALUE";
    case RowErrorKind::kBadTimestamp: return "BAD_TIMESTAMP";
    case RowErrorKind::kClockReset: return "CLOCK_RESET";
    case RowErrorKind::kBadNodeId: return "BAD_NODE_ID";
    case RowErrorKind::kChecksum: return "CHECKSUM";
  }
  return "UNKNOWN";
}

std::string FileHeader::source_node() const {
  auto key = dialect.kind == DialectKind::kNodeLogger ? "node_sn" : "logger_sn";
  auto it = properties.find(key);
  return it == properties.end() ? std::string() : it->second;
}

std::uint8_t row_checksum(std::string_view row_body) {
  std::uint8_t x = 0;
  for (char c : row_body) x ^= static_cast<std::uint8_t>(c);
  return x;
}

std::string finish_row(Dialect d, std::string_view row_body) {
  std::string row(row_body);
  if (d.has_checksum()) {
    char buf[4];
    std::snprintf(buf, sizeof buf, "*%02X", row_checksum(row_body));
    row += buf;
  }
  return row;
}

Dialect detect_dialect(std::string_view first_bytes) {
  if (first_bytes.empty()) throw Error(ErrorCode::kInvalidArgument, "empty input");
  auto window = strip_bom(first_bytes.substr(0, kDetectWindow));
  auto nl = window.find('\n');
  auto line = window.substr(0, nl);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  line = trim(line);

  std::vector<Dialect> matches;
  for (const auto& sig : kSignatures) {
    if (line.substr(0, sig.tag.size()) != sig.tag) continue;
    auto version = parse_version(line.substr(sig.tag.size()));
    if (!version) continue;
    if (*version < 1 || *version > kMaxDialectVersion) {
      throw Error(ErrorCode::kUnknownDialect,
                  "unsupported " + std::string(dialect_name(sig.kind)) + " version " + std::to_string(*version));
    }
    matches.push_back({sig.kind, *version});
  }
  if (matches.empty()) throw Error(ErrorCode::kUnknownDialect, "no dialect signature on first line");
  if (matches.size() > 1) throw Error(ErrorCode::kAmbiguousDialect, "more than one dialect signature matched");
  return matches.front();
}

FileHeader read_header(std::string_view bytes, Dialect dialect) {
  auto lines = split_lines(strip_bom(bytes));
  FileHeader header;
  header.dialect = dialect;
  if (lines.empty() || trim(lines[0].text) != dialect_signature(dialect)) {
    malformed("first line is not '" + dialect_signature(dialect) + "'");
  }
  std::size_t i = 1;
  for (; i < lines.size(); ++i) {
    auto text = lines[i].text;
    if (text.empty() || text.front() != '#') break;
    auto body = trim(text.substr(1));
    auto eq = body.find('=');
    if (eq == std::string_view::npos) continue;  // comment
    header.properties.emplace(std::string(trim(body.substr(0, eq))), std::string(trim(body.substr(eq + 1))));
  }
  if (i >= lines.size()) malformed("missing CSV header row");
  header.csv_header_line = lines[i].number;
  auto tokens = split_csv(lines[i].text);
  std::size_t prefix = dialect.kind == DialectKind::kWirelessAggregator ? 2 : 1;
  if (dialect.kind == DialectKind::kWirelessAggregator) {
    if (tokens.size() < 2 || trim(tokens[0]) != "epoch_s" || trim(tokens[1]) != "node_id") {
      malformed("CSV header must start with 'epoch_s,node_id'");
    }
  } else if (tokens.empty() || trim(tokens[0]) != "ts_local") {
    malformed("CSV header must start with 'ts_local'");
  }
  std::set<std::string_view> seen;
  for (std::size_t k = prefix; k < tokens.size(); ++k) {
    auto name = trim(tokens[k]);
    if (!is_identifier(name)) malformed("bad column name '" + std::string(name) + "'");
    if (!seen.insert(name).second) malformed("duplicate column '" + std::string(name) + "'");
    header.columns.emplace_back(name);
  }
  if (header.columns.empty()) malformed("no value columns declared");

  if (dialect.kind == DialectKind::kWiredLogger) {
    auto it = header.properties.find("columns");
    if (it == header.properties.end()) malformed("missing '# columns=<n>' declaration");
    auto n = parse_version(it->second);
    if (!n || static_cast<std::size_t>(*n) != header.columns.size()) {
      malformed("'# columns=" + it->second + "' disagrees with the CSV header");
    }
    if (header.source_node().empty()) malformed("missing '# logger_sn=<text>'");
  }
  if (dialect.kind == DialectKind::kNodeLogger && header.source_node().empty()) {
    malformed("missing '# node_sn=<text>'");
  }
  return header;
}

ParsedFile parse_file(std::string_view bytes, Dialect dialect, const Site& site) {
  bytes = strip_bom(bytes);
  ParsedFile out;
  out.header = read_header(bytes, dialect);
  out.report.dialect = dialect;
  const auto& header = out.header;
  const bool aggregator = dialect.kind == DialectKind::kWirelessAggregator;
  const std::size_t prefix = aggregator ? 2 : 1;
  const std::size_t arity = prefix + header.columns.size();
  const std::string fixed_node = header.source_node();

  for (const auto& line : split_lines(bytes)) {
    if (line.number <= header.csv_header_line) continue;
    if (trim(line.text).empty()) continue;

    std::string node = fixed_node;
    auto reject = [&](RowErrorKind kind) {
      out.report.errors.push_back({line.number, kind, excerpt(line.text), node});
      out.rejected_lines.emplace_back(line.number, std::string(line.text));
      ++out.report.rows_rejected;
    };

    std::string_view body = line.text;
    if (dialect.has_checksum()) {
      auto star = body.rfind('*');
      if (star == std::string_view::npos || body.size() - star != 3) {
        reject(RowErrorKind::kChecksum);
        continue;
      }
      auto hex = body.substr(star + 1);
      unsigned value = 0;
      auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), value, 16);
      bool upper = std::all_of(hex.begin(), hex.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'A' && c <= 'F'); });
      body = body.substr(0, star);
      if (ec != std::errc() || ptr != hex.data() + hex.size() || !upper || value != row_checksum(body)) {
        reject(RowErrorKind::kChecksum);
        continue;
      }
    }

    auto fields = split_csv(body);
    if (aggregator && fields.size() >= 2 && is_identifier(trim(fields[1]))) node = std::string(trim(fields[1]));
    if (fields.size() != arity) {
      reject(RowErrorKind::kArity);
      continue;
    }

    RawRow row;
    row.line_number = line.number;
    if (aggregator) {
      auto epoch = parse_epoch(trim(fields[0]));
      if (!epoch) {
        reject(RowErrorKind::kBadTimestamp);
        continue;
      }
      row.ts_local = LocalInstant{std::chrono::seconds{*epoch}};
      auto id = trim(fields[1]);
      if (!is_identifier(id)) {
        reject(RowErrorKind::kBadNodeId);
        continue;
      }
      row.node_id = std::string(id);
    } else {
      auto ts = parse_local(trim(fields[0]));
      if (!ts) {
        reject(RowErrorKind::kBadTimestamp);
        continue;
      }
      row.ts_local = *ts;
      row.node_id = fixed_node;
    }
    if (to_epoch(to_utc(row.ts_local, site.utc_offset_standard)) < kEarliestPlausibleUtc) {
      reject(RowErrorKind::kClockReset);
      continue;
    }

    bool corrupt = false;
    row.values.reserve(header.columns.size());
    for (std::size_t k = prefix; k < fields.size(); ++k) {
      auto token = trim(fields[k]);
      if (is_missing_token(token)) {
        row.values.emplace_back(std::nullopt);
        continue;
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) {
        corrupt = true;
        break;
      }
      row.values.emplace_back(v);
    }
    if (corrupt) {
      reject(RowErrorKind::kCorruptValue);
      continue;
    }
    out.rows.push_back(std::move(row));
    ++out.report.rows_ok;
  }
  return out;
}

Validated validate_structure(const ParsedFile& file, const Manifest& manifest) {
  Validated out;
  const auto& columns = file.header.columns;
  std::map<std::string, std::vector<std::string>> candidates;
  std::set<std::string> unmapped;

  // (node, column index) -> channel, resolved once per node.
  std::map<std::string, std::vector<std::optional<ChannelRef>>> resolved;
  auto resolve_node = [&](const std::string& node_id) -> const std::vector<std::optional<ChannelRef>>& {
    auto it = resolved.find(node_id);
    if (it != resolved.end()) return it->second;
    std::vector<std::optional<ChannelRef>> refs(columns.size());
    auto node_ref = manifest.find_node(node_id);
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (node_ref) {
        for (const auto& ch : node_ref->node->channels) {
          if (ch.column == columns[k]) {
            refs[k] = manifest.channel(ch.channel_id);
            candidates[columns[k]].push_back(ch.channel_id);
          }
        }
      }
      if (!refs[k]) unmapped.insert(node_ref ? columns[k] : node_id + "/" + columns[k]);
    }
    return resolved.emplace(node_id, std::move(refs)).first->second;
  };

  for (const auto& row : file.rows) {
    const auto& refs = resolve_node(row.node_id.value_or(""));
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (!refs[k] || !row.values[k]) continue;
      const auto& ref = *refs[k];
      const auto& ch = *ref.channel;
      SensorRecord rec;
      rec.ts_utc = to_utc(row.ts_local, ref.site->utc_offset_standard);
      rec.raw_value = *row.values[k];
      rec.eng_value = query::convert_raw(ch.variable, *row.values[k], ch.calibration);
      if (*rec.eng_value < ch.valid_min || *rec.eng_value > ch.valid_max) rec.flags.insert(QualityFlag::kOutOfRange);
      out.records[ch.channel_id].push_back(rec);
    }
  }
  for (auto& [column, ids] : candidates) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    out.channel_map.push_back({column, ids});
  }
  out.unmapped_columns.assign(unmapped.begin(), unmapped.end());
  return out;
}

}  // namespace envnet::formats
