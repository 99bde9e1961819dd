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

#include "spatial_oracle.hpp"

#include <cmath>

namespace oracle {

std::vector<std::optional<double>> idw(const std::vector<Pt>& pts, const Grid& g, double power, double cutoff) {
  std::vector<std::optional<double>> out;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      double cx = g.x0 + i * g.cell;
      double cy = g.y0 + j * g.cell;
      double num = 0.0, den = 0.0;
      bool any = false;
      std::optional<double> snapped;
      double snap_d = 1e-6;
      double lo = 0.0, hi = 0.0;
      for (const auto& p : pts) {
        double d = std::hypot(p.x - cx, p.y - cy);
        if (d <= snap_d) {
          snap_d = d;
          snapped = p.value;
        }
        if (d > cutoff) continue;
        if (!any) {
          lo = hi = p.value;
        }
        any = true;
        lo = p.value < lo ? p.value : lo;
        hi = p.value > hi ? p.value : hi;
        double w = 1.0 / std::pow(d, power);
        num += w * p.value;
        den += w;
      }
      if (snapped) {
        out.push_back(snapped);
      } else if (!any) {
        out.push_back(std::nullopt);
      } else {
        double v = num / den;
        out.push_back(v < lo ? lo : (v > hi ? hi : v));
      }
    }
  }
  return out;
}

std::vector<double> reliability(const std::vector<Pt>& pts, const Grid& g, double cutoff) {
  std::vector<double> out;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      double cx = g.x0 + i * g.cell;
      double cy = g.y0 + j * g.cell;
      double alive = 0.0, all = 0.0;
      int n_snap = 0, n_snap_alive = 0;
      for (const auto& p : pts) {
        double d = std::hypot(p.x - cx, p.y - cy);
        if (d <= 1e-6) {
          ++n_snap;
          n_snap_alive += p.alive ? 1 : 0;
          continue;
        }
        if (d > cutoff) continue;
        all += 1.0 / (d * d);
        if (p.alive) alive += 1.0 / (d * d);
      }
      if (n_snap > 0) {
        out.push_back(static_cast<double>(n_snap_alive) / n_snap);
      } else if (all == 0.0) {
        out.push_back(0.0);
      } else {
        out.push_back(alive == all ? 1.0 : alive / all);
      }
    }
  }
  return out;
}

}  // namespace oracle
