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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "envnet/store.hpp"
#include "envnet/types.hpp"

namespace envnet::spatial {

inline constexpr double kSnapDistance = 1e-6;
inline constexpr double kDefaultPower = 2.0;
inline constexpr int kDefaultGridCells = 50;

// Cell (i, j) has its centre at (origin_x + i*cell_size, origin_y + j*cell_size).
// Arrays are row-major: index j*nx + i.
struct GridGeometry {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_size = 1.0;
  int nx = 0;
  int ny = 0;

  std::size_t cells() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  double x(int i) const { return origin_x + i * cell_size; }
  double y(int j) const { return origin_y + j * cell_size; }
  bool operator==(const GridGeometry&) const = default;
};

struct ValuePoint {
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
};

struct AlivePoint {
  double x = 0.0;
  double y = 0.0;
  bool alive = true;
};

// Throws kEmptyPoints, kBadParams for power <= 0, cutoff <= 0 or an empty grid.
std::vector<std::optional<double>> idw_interpolate(const std::vector<ValuePoint>& points, const GridGeometry& grid,
                                                   double power, double cutoff_m);

// Share of 1/d^2 weight carried by alive points within the cutoff.
std::vector<double> reliability_map(const std::vector<AlivePoint>& points, const GridGeometry& grid,
                                    double cutoff_m);

// Median over points of the distance to the nearest other point; 0 for fewer
// than two points.
double median_nearest_neighbor(const std::vector<std::pair<double, double>>& xy);

struct GridFrame {
  Instant ts;
  GridGeometry grid;
  std::vector<std::optional<double>> values;
  std::vector<double> reliability;
};

struct FrameOptions {
  std::int64_t step_s = 3600;
  std::optional<GridGeometry> grid;
  double power = kDefaultPower;
  // Defaults to three times the median nearest-neighbour spacing.
  std::optional<double> cutoff_m;
};

// Node bounding box covered by kDefaultGridCells along the longer side.
GridGeometry default_grid(const Deployment& deployment);
double default_cutoff(const Deployment& deployment);

struct FrameSequence {
  std::string deployment_id;
  Variable variable = Variable::kAirTemp;
  std::int64_t step_s = 0;
  double power = kDefaultPower;
  double cutoff_m = 0.0;
  GridGeometry grid;
  std::vector<GridFrame> frames;
};

// One frame per step bin over [from, to), ceil((to-from)/step) frames.
// Throws kUnknownDeployment, kUnknownVariable, kBadParams.
FrameSequence frame_sequence(const Store& store, std::string_view deployment_id, Variable variable, Instant from,
                             Instant to, const FrameOptions& options);

// Sequence manifest: geometry, parameters, timestamps, value range.
nlohmann::json sequence_manifest(const FrameSequence& seq);
nlohmann::json to_json(const FrameSequence& seq);
// Row-major CSV matrix, ny lines of nx cells; absent cells are empty.
std::string matrix_csv(const std::vector<std::optional<double>>& cells, const GridGeometry& grid);
std::string matrix_csv(const std::vector<double>& cells, const GridGeometry& grid);
// Writes frames.json plus values_NNNN.csv and reliability_NNNN.csv.
void export_frames(const FrameSequence& seq, const std::filesystem::path& dir);

}  // namespace envnet::spatial
