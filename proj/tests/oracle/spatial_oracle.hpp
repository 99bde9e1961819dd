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

// Double-loop reference for IDW and reliability grids.

#include <optional>
#include <vector>

namespace oracle {

struct Pt {
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
  bool alive = true;
};

struct Grid {
  double x0 = 0.0;
  double y0 = 0.0;
  double cell = 1.0;
  int nx = 0;
  int ny = 0;
};

std::vector<std::optional<double>> idw(const std::vector<Pt>& pts, const Grid& g, double power, double cutoff);
std::vector<double> reliability(const std::vector<Pt>& pts, const Grid& g, double cutoff);

}  // namespace oracle
