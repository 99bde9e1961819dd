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

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "envnet/manifest.hpp"
#include "envnet/types.hpp"

namespace envnet::formats {

enum class DialectKind { kWiredLogger, kWirelessAggregator, kNodeLogger };

// Version 1 is the plain grammar. Version 2 appends `*HH` to every data row,
// the XOR of all preceding bytes of the row as two uppercase hex digits.
inline constexpr int kMaxDialectVersion = 2;

struct Dialect {
  DialectKind kind = DialectKind::kWiredLogger;
  int version = 1;

  bool has_checksum() const { return version >= 2; }
  bool operator==(const Dialect&) const = default;
};

std::string_view dialect_name(DialectKind kind);
std::optional<DialectKind> parse_dialect_name(std::string_view name);
// e.g. "# PHN-WIRED v1"
std::string dialect_signature(Dialect d);

enum class RowErrorKind { kArity, kCorruptValue, kBadTimestamp, kClockReset, kBadNodeId, kChecksum };

std::string_view row_error_name(RowErrorKind kind);

struct RowError {
  std::size_t line_number = 0;
  RowErrorKind kind = RowErrorKind::kArity;
  std::string excerpt;  // at most 80 bytes of the offending line
  std::string node_id;  // empty when the row cannot be attributed
};

struct ColumnMapping {
  std::string column;
  std::vector<std::string> channel_ids;
};

struct ParseReport {
  Dialect dialect;
  std::size_t rows_ok = 0;
  std::size_t rows_rejected = 0;
  std::vector<RowError> errors;
  std::vector<ColumnMapping> channel_map;
  std::vector<std::string> unmapped_columns;
  std::vector<std::string> warnings;
};

struct FileHeader {
  Dialect dialect;
  std::map<std::string, std::string, std::less<>> properties;
  std::vector<std::string> columns;  // value columns only
  std::size_t csv_header_line = 0;
  // logger_sn / node_sn for single-source dialects.
  std::string source_node() const;
};

struct RawRow {
  std::size_t line_number = 0;
  LocalInstant ts_local;
  std::optional<std::string> node_id;
  // Aligned with FileHeader::columns; nullopt for missing-value tokens.
  std::vector<std::optional<double>> values;
};

struct ParsedFile {
  FileHeader header;
  std::vector<RawRow> rows;
  ParseReport report;
  // Rejected lines verbatim, keyed by line number.
  std::vector<std::pair<std::size_t, std::string>> rejected_lines;
};

// Reads only the header block of at most the first 4 KiB.
// Throws kUnknownDialect, or kInvalidArgument for empty input.
Dialect detect_dialect(std::string_view first_bytes);

// File-level problems throw kMalformedHeader; row-level problems land in the
// report and never abort the file.
ParsedFile parse_file(std::string_view bytes, Dialect dialect, const Site& site);

// Reads the header block without touching data rows.
FileHeader read_header(std::string_view bytes, Dialect dialect);

struct Validated {
  // Per channel, in file order.
  std::map<std::string, std::vector<SensorRecord>> records;
  std::vector<ColumnMapping> channel_map;
  std::vector<std::string> unmapped_columns;
};

Validated validate_structure(const ParsedFile& file, const Manifest& manifest);

// Writer helpers shared with the synthetic generator.
std::uint8_t row_checksum(std::string_view row_body);
std::string finish_row(Dialect d, std::string_view row_body);

}  // namespace envnet::formats
