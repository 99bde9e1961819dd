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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "envnet/time.hpp"

namespace envnet {

enum class Variable {
  kAirTemp,
  kRelHumidity,
  kRainfall,
  kPar,
  kSolar,
  kSoilMoisture,
  kLeafTemp,
};

std::string_view variable_name(Variable v);
std::optional<Variable> parse_variable(std::string_view name);

enum class Orientation { kIncoming, kReflected, kNone };

std::string_view orientation_name(Orientation o);
std::optional<Orientation> parse_orientation(std::string_view name);

enum class QualityFlag : std::uint8_t {
  kOutOfRange,
  kFormatRepaired,
  kTimeCorrected,
  kSuspectDrift,
  kMissing,
  kDuplicate,
};

inline constexpr QualityFlag kAllFlags[] = {
    QualityFlag::kOutOfRange, QualityFlag::kFormatRepaired, QualityFlag::kTimeCorrected,
    QualityFlag::kSuspectDrift, QualityFlag::kMissing,      QualityFlag::kDuplicate,
};

std::string_view flag_name(QualityFlag f);
std::optional<QualityFlag> parse_flag(std::string_view name);

// A set of QualityFlag stored as a bitmask.
class FlagSet {
 public:
  FlagSet() = default;
  FlagSet(std::initializer_list<QualityFlag> flags) {
    for (auto f : flags) insert(f);
  }

  bool contains(QualityFlag f) const { return (bits_ & bit(f)) != 0; }
  void insert(QualityFlag f) { bits_ |= bit(f); }
  void erase(QualityFlag f) { bits_ &= static_cast<std::uint8_t>(~bit(f)); }
  bool empty() const { return bits_ == 0; }
  bool intersects(FlagSet other) const { return (bits_ & other.bits_) != 0; }
  FlagSet operator|(FlagSet other) const {
    FlagSet r;
    r.bits_ = bits_ | other.bits_;
    return r;
  }
  std::uint8_t bits() const { return bits_; }
  bool operator==(const FlagSet&) const = default;

  // `|`-separated names in enum order; empty string for the empty set.
  std::string to_string() const;
  static std::optional<FlagSet> parse(std::string_view text);

 private:
  static std::uint8_t bit(QualityFlag f) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(f));
  }
  std::uint8_t bits_ = 0;
};

struct CalibrationSpec {
  enum class Kind { kNone, kIdentity, kLinear, kTippingBucket };
  Kind kind = Kind::kIdentity;
  // kLinear: eng = scale * raw + offset. kTippingBucket: eng = scale * tips.
  double scale = 1.0;
  double offset = 0.0;

  bool operator==(const CalibrationSpec&) const = default;
};

std::string_view calibration_kind_name(CalibrationSpec::Kind k);
std::optional<CalibrationSpec::Kind> parse_calibration_kind(std::string_view name);

struct Site {
  std::string site_id;
  std::string name;
  double latitude = 0.0;
  double longitude = 0.0;
  // Minutes east of UTC for local standard time.
  int utc_offset_standard = 0;

  bool operator==(const Site&) const = default;
};

struct ChannelDescriptor {
  std::string channel_id;
  // Header token that names this channel in logger files.
  std::string column;
  Variable variable = Variable::kAirTemp;
  Orientation orientation = Orientation::kNone;
  double valid_min = 0.0;
  double valid_max = 0.0;
  std::string raw_unit;
  CalibrationSpec calibration;

  bool operator==(const ChannelDescriptor&) const = default;
};

struct NodeDescriptor {
  std::string node_id;
  double x_m = 0.0;
  double y_m = 0.0;
  double height_m = 0.0;
  std::vector<ChannelDescriptor> channels;

  bool operator==(const NodeDescriptor&) const = default;
};

enum class DeploymentKind { kTower, kUnderstory };

std::string_view deployment_kind_name(DeploymentKind k);
std::optional<DeploymentKind> parse_deployment_kind(std::string_view name);

struct Deployment {
  std::string deployment_id;
  std::string site_id;
  DeploymentKind kind = DeploymentKind::kUnderstory;
  std::vector<NodeDescriptor> nodes;
  std::int64_t cadence_s = 900;

  bool operator==(const Deployment&) const = default;
};

struct SensorRecord {
  Instant ts_utc;
  std::optional<double> raw_value;
  std::optional<double> eng_value;
  FlagSet flags;

  bool operator==(const SensorRecord&) const = default;
};

// Table-2 sensor ranges and the default raw unit and calibration per variable.
ChannelDescriptor default_channel(Variable v, Orientation o, std::string channel_id,
                                  std::string column);

// Throws Error(kInvalidManifest) naming the offending field.
void validate_site(const Site& s);
void validate_deployment(const Deployment& d);

}  // namespace envnet
