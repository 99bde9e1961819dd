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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "envnet/formats.hpp"
#include "envnet/manifest.hpp"
#include "envnet/types.hpp"

namespace envnet::simgen {

using formats::Dialect;
using formats::DialectKind;
using formats::RowErrorKind;

enum class Strategy { kTransect, kStar, kGrid };

std::string_view strategy_name(Strategy s);

struct StrategyParams {
  double spacing_m = 10.0;     // transect, grid
  std::vector<double> radii;   // star; nodes split evenly over the rings
  int rows = 0;                // grid
  int cols = 0;                // grid
};

// Throws kBadParams.
std::vector<std::pair<double, double>> place_nodes(Strategy strategy, const StrategyParams& params, int n);

enum class FaultKind { kClockOffsetH, kClockDriftMin, kGap, kMalformedRowsPct, kColumnArity, kDstShift };

std::string_view fault_name(FaultKind k);

// `target` is a node id, a deployment id or "*". An absent window covers the
// whole simulated range. Magnitude units follow the kind: hours, minutes of
// drift accumulated over the window, percent of rows; unused for kGap.
struct FaultSpec {
  FaultKind kind = FaultKind::kGap;
  std::string target = "*";
  std::optional<Instant> from;
  std::optional<Instant> to;
  double magnitude = 0.0;
};

struct Canopy {
  double rho_par = 0.03;
  double rho_nir = 0.36;
  double tau = 0.2;
};

// Column tokens: par_in, par_refl, solar_in, solar_refl, air_temp, rh, rain,
// soil_vwc, leaf_temp.
struct SimDeployment {
  std::string deployment_id;
  DeploymentKind kind = DeploymentKind::kUnderstory;
  Dialect dialect{DialectKind::kWirelessAggregator, 1};
  Strategy strategy = Strategy::kTransect;
  StrategyParams params;
  int node_count = 1;
  double height_m = 2.0;
  std::vector<std::string> columns;
};

struct SimSpec {
  std::uint64_t seed = 1;
  Site site;
  Instant start;
  int days = 1;
  std::int64_t cadence_s = 900;
  double par_max = 2000.0;     // umol m-2 s-1 at zenith
  double solar_max = 1000.0;   // W m-2 at zenith
  double noise = 0.02;         // bounded uniform multiplicative
  Canopy canopy;
  std::vector<SimDeployment> deployments;
  std::vector<FaultSpec> faults;

  Instant end() const { return start + std::chrono::days{days}; }
};

// Throws kBadParams naming the offending field.
SimSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimSpec& spec);

// Node ids are <deployment>-nNN, channel ids <node>.<column>.
Manifest build_manifest(const SimSpec& spec);

// Noise-free clear-sky fields at one instant. Irradiance scales with the
// cosine of the zenith measured from the apparent-sunrise horizon.
struct ClearSky {
  double cos_zenith = 0.0;
  double par_in = 0.0;
  double solar_in = 0.0;
};
ClearSky clear_sky(const SimSpec& spec, Instant utc);

struct TruthClock {
  FaultKind kind = FaultKind::kClockOffsetH;
  std::string node_id;
  Instant from;
  Instant to;
  double magnitude = 0.0;
};

struct TruthGap {
  std::string channel_id;
  Instant start;  // first missing sample
  Instant end;    // last missing sample
  std::int64_t missing_count = 0;
};

struct TruthRow {
  std::string file;
  std::size_t line = 0;
  RowErrorKind kind = RowErrorKind::kCorruptValue;
  std::string node_id;
};

struct GroundTruth {
  std::uint64_t seed = 0;
  std::vector<TruthClock> clocks;
  std::vector<TruthGap> gaps;
  std::vector<TruthRow> malformed;
  std::map<std::string, std::size_t> data_rows;  // per file

  nlohmann::json to_json() const;
  static GroundTruth from_json(const nlohmann::json& j);
};

struct SimOutput {
  Manifest manifest;
  // Relative path -> file bytes, in emission order by path.
  std::map<std::string, std::string> files;
  GroundTruth truth;
};

// Deterministic in the spec: identical specs give byte-identical files.
SimOutput generate(const SimSpec& spec);

inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kTruthName = "ground_truth.json";

// Writes data files under dir plus manifest.json and ground_truth.json.
void write_output(const SimOutput& out, const std::filesystem::path& dir);

}  // namespace envnet::simgen
