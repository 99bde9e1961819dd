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

#include "envnet/types.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "envnet/error.hpp"

namespace envnet {

namespace {

constexpr std::array<std::pair<Variable, std::string_view>, 7> kVariableNames{{
    {Variable::kAirTemp, "air_temp_C"},
    {Variable::kRelHumidity, "rel_humidity_pct"},
    {Variable::kRainfall, "rainfall_mm"},
    {Variable::kPar, "par_umol_m2_s"},
    {Variable::kSolar, "solar_W_m2"},
    {Variable::kSoilMoisture, "soil_moisture_vwc_pct"},
    {Variable::kLeafTemp, "leaf_temp_C"},
}};

constexpr std::array<std::string_view, 6> kFlagNames{
    "OUT_OF_RANGE", "FORMAT_REPAIRED", "TIME_CORRECTED", "SUSPECT_DRIFT", "MISSING", "DUPLICATE",
};

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidManifest, what);
}

}  // namespace

std::string_view variable_name(Variable v) {
  for (auto& [var, name] : kVariableNames) {
    if (var == v) return name;
  }
  return "unknown";
}

std::optional<Variable> parse_variable(std::string_view name) {
  for (auto& [var, n] : kVariableNames) {
    if (n == name) return var;
  }
  return std::nullopt;
}

std::string_view orientation_name(Orientation o) {
  switch (o) {
    case Orientation::kIncoming: return "incoming";
    case Orientation::kReflected: return "reflected";
    case Orientation::kNone: return "none";
  }
  return "none";
}

std::optional<Orientation> parse_orientation(std::string_view name) {
  if (name == "incoming") return Orientation::kIncoming;
  if (name == "reflected") return Orientation::kReflected;
  if (name == "none") return Orientation::kNone;
  return std::nullopt;
}

std::string_view flag_name(QualityFlag f) { return kFlagNames[static_cast<std::size_t>(f)]; }

std::optional<QualityFlag> parse_flag(std::string_view name) {
  for (std::size_t i = 0; i < kFlagNames.size(); ++i) {
    if (kFlagNames[i] == name) return static_cast<QualityFlag>(i);
  }
  return std::nullopt;
}

std::string FlagSet::to_string() const {
  std::string out;
  for (auto f : kAllFlags) {
    if (!contains(f)) continue;
    if (!out.empty()) out += '|';
    out += flag_name(f);
  }
  return out;
}

std::optional<FlagSet> FlagSet::parse(std::string_view text) {
  FlagSet set;
  while (!text.empty()) {
    auto bar = text.find('|');
    auto token = text.substr(0, bar);
    auto flag = parse_flag(token);
    if (!flag || set.contains(*flag)) return std::nullopt;
    set.insert(*flag);
    if (bar == std::string_view::npos) break;
    text.remove_prefix(bar + 1);
    if (text.empty()) return std::nullopt;
  }
  return set;
}

std::string_view calibration_kind_name(CalibrationSpec::Kind k) {
  switch (k) {
    case CalibrationSpec::Kind::kNone: return "none";
    case CalibrationSpec::Kind::kIdentity: return "identity";
    case CalibrationSpec::Kind::kLinear: return "linear";
    case CalibrationSpec::Kind::kTippingBucket: return "tipping_bucket";
  }
  return "none";
}

std::optional<CalibrationSpec::Kind> parse_calibration_kind(std::string_view name) {
  if (name == "none") return CalibrationSpec::Kind::kNone;
  if (name == "identity") return CalibrationSpec::Kind::kIdentity;
  if (name == "linear") return CalibrationSpec::Kind::kLinear;
  if (name == "tipping_bucket") return CalibrationSpec::Kind::kTippingBucket;
  return std::nullopt;
}

std::string_view deployment_kind_name(DeploymentKind k) {
  return k == DeploymentKind::kTower ? "tower" : "understory";
}

std::optional<DeploymentKind> parse_deployment_kind(std::string_view name) {
  if (name == "tower") return DeploymentKind::kTower;
  if (name == "understory") return DeploymentKind::kUnderstory;
  return std::nullopt;
}

ChannelDescriptor default_channel(Variable v, Orientation o, std::string channel_id,
                                  std::string column) {
  ChannelDescriptor c;
  c.channel_id = std::move(channel_id);
  c.column = std::move(column);
  c.variable = v;
  c.orientation = o;
  switch (v) {
    case Variable::kAirTemp:
    case Variable::kLeafTemp:
      c.valid_min = -40.0;
      c.valid_max = 75.0;
      c.raw_unit = "C";
      break;
    case Variable::kRelHumidity:
      c.valid_min = 0.0;
      c.valid_max = 100.0;
      c.raw_unit = "%";
      break;
    case Variable::kRainfall:
      // RG3-M: 0.2 mm per tip, at most 1270 mm/h.
      c.valid_min = 0.0;
      c.valid_max = 1270.0;
      c.raw_unit = "tips";
      c.calibration = {CalibrationSpec::Kind::kTippingBucket, 0.2, 0.0};
      break;
    case Variable::kPar:
      c.valid_min = 0.0;
      c.valid_max = 2500.0;
      c.raw_unit = "umol/m2/s";
      break;
    case Variable::kSolar:
      c.valid_min = 0.0;
      c.valid_max = 1280.0;
      c.raw_unit = "W/m2";
      break;
    case Variable::kSoilMoisture:
      c.valid_min = 0.0;
      c.valid_max = 100.0;
      c.raw_unit = "mV";
      c.calibration = {CalibrationSpec::Kind::kLinear, 0.1, -20.0};
      break;
  }
  return c;
}

void validate_site(const Site& s) {
  if (s.site_id.empty()) invalid("site_id is empty");
  if (!(s.latitude >= -90.0 && s.latitude <= 90.0)) invalid("site " + s.site_id + ": latitude out of range");
  if (!(s.longitude >= -180.0 && s.longitude <= 180.0)) {
    invalid("site " + s.site_id + ": longitude out of range");
  }
  if (s.utc_offset_standard < -720 || s.utc_offset_standard > 840 || s.utc_offset_standard % 15 != 0) {
    invalid("site " + s.site_id + ": utc_offset_standard must be a multiple of 15 in [-720, 840]");
  }
}

void validate_deployment(const Deployment& d) {
  if (d.deployment_id.empty()) invalid("deployment_id is empty");
  if (d.nodes.empty()) invalid("deployment " + d.deployment_id + " has no nodes");
  if (d.cadence_s <= 0) invalid("deployment " + d.deployment_id + ": cadence must be positive");
  for (const auto& n : d.nodes) {
    if (n.node_id.empty()) invalid("deployment " + d.deployment_id + ": empty node_id");
    if (!(n.height_m >= 0.0)) invalid("node " + n.node_id + ": negative height");
    for (const auto& c : n.channels) {
      if (c.channel_id.empty() || c.column.empty()) invalid("node " + n.node_id + ": channel without id/column");
      if (!(c.valid_min < c.valid_max)) invalid("channel " + c.channel_id + ": valid_min >= valid_max");
    }
  }
}

}  // namespace envnet
