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

#include "envnet/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "envnet/error.hpp"
#include "envnet/query.hpp"

namespace envnet::spatial {

namespace {

void check_grid(const GridGeometry& grid) {
  if (grid.nx <= 0 || grid.ny <= 0 || !(grid.cell_size > 0.0)) {
    throw Error(ErrorCode::kBadParams, "grid needs nx, ny >= 1 and cell_size > 0");
  }
}

const ChannelDescriptor* node_channel(const NodeDescriptor& node, Variable v) {
  const ChannelDescriptor* fallback = nullptr;
  for (const auto& c : node.channels) {
    if (c.variable != v) continue;
    if (c.orientation != Orientation::kReflected) return &c;
    if (!fallback) fallback = &c;
  }
  return fallback;
}

std::string cell_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<std::optional<double>> idw_interpolate(const std::vector<ValuePoint>& points, const GridGeometry& grid,
                                                   double power, double cutoff_m) {
  if (points.empty()) throw Error(ErrorCode::kEmptyPoints, "no points to interpolate");
  if (!(power > 0.0)) throw Error(ErrorCode::kBadParams, "power must be > 0");
  if (!(cutoff_m > 0.0)) throw Error(ErrorCode::kBadParams, "cutoff must be > 0");
  check_grid(grid);

  std::vector<std::optional<double>> out(grid.cells());
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      double cx = grid.x(i), cy = grid.y(j);
      double num = 0.0, den = 0.0;
      const ValuePoint* snapped = nullptr;
      double snapped_d = kSnapDistance;
      for (const auto& p : points) {
        double d = std::hypot(p.x - cx, p.y - cy);
        if (d <= snapped_d) {
          snapped = &p;
          snapped_d = d;
        }
        if (d > cutoff_m || d <= kSnapDistance) continue;
        double w = 1.0 / std::pow(d, power);
        num += w * p.value;
        den += w;
      }
      auto& cell = out[static_cast<std::size_t>(j) * grid.nx + i];
      if (snapped) {
        cell = snapped->value;
      } else if (den > 0.0) {
        // Clamp guards the last-ulp overshoot of the weighted mean.
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& p : points) {
          if (std::hypot(p.x - cx, p.y - cy) > cutoff_m) continue;
          lo = std::min(lo, p.value);
          hi = std::max(hi, p.value);
        }
        cell = std::clamp(num / den, lo, hi);
      }
    }
  }
  return out;
}

std::vector<double> reliability_map(const std::vector<AlivePoint>& points, const GridGeometry& grid,
                                    double cutoff_m) {
  check_grid(grid);
  std::vector<double> out(grid.cells(), 0.0);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      double cx = grid.x(i), cy = grid.y(j);
      double alive = 0.0, all = 0.0;
      std::size_t snapped_all = 0, snapped_alive = 0;
      for (const auto& p : points) {
        double d = std::hypot(p.x - cx, p.y - cy);
        if (d > cutoff_m) continue;
        if (d <= kSnapDistance) {
          ++snapped_all;
          if (p.alive) ++snapped_alive;
          continue;
        }
        double w = 1.0 / (d * d);
        all += w;
        if (p.alive) alive += w;
      }
      double r = 0.0;
      if (snapped_all > 0) {
        r = static_cast<double>(snapped_alive) / static_cast<double>(snapped_all);
      } else if (all > 0.0) {
        r = alive == all ? 1.0 : alive / all;
      }
      out[static_cast<std::size_t>(j) * grid.nx + i] = std::clamp(r, 0.0, 1.0);
    }
  }
  return out;
}

double median_nearest_neighbor(const std::vector<std::pair<double, double>>& xy) {
  if (xy.size() < 2) return 0.0;
  std::vector<double> nn;
  nn.reserve(xy.size());
  for (std::size_t a = 0; a < xy.size(); ++a) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < xy.size(); ++b) {
      if (a != b) best = std::min(best, std::hypot(xy[a].first - xy[b].first, xy[a].second - xy[b].second));
    }
    nn.push_back(best);
  }
  std::sort(nn.begin(), nn.end());
  std::size_t n = nn.size();
  return n % 2 ? nn[n / 2] : 0.5 * (nn[n / 2 - 1] + nn[n / 2]);
}

GridGeometry default_grid(const Deployment& deployment) {
  double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
  double max_x = -min_x, max_y = -min_x;
  for (const auto& n : deployment.nodes) {
    min_x = std::min(min_x, n.x_m);
    max_x = std::max(max_x, n.x_m);
    min_y = std::min(min_y, n.y_m);
    max_y = std::max(max_y, n.y_m);
  }
  GridGeometry g;
  if (deployment.nodes.empty()) {
    g.nx = g.ny = 1;
    return g;
  }
  double extent = std::max(max_x - min_x, max_y - min_y);
  g.origin_x = min_x;
  g.origin_y = min_y;
  g.cell_size = extent > 0.0 ? extent / (kDefaultGridCells - 1) : 1.0;
  g.nx = static_cast<int>(std::floor((max_x - min_x) / g.cell_size + 1e-9)) + 1;
  g.ny = static_cast<int>(std::floor((max_y - min_y) / g.cell_size + 1e-9)) + 1;
  return g;
}

double default_cutoff(const Deployment& deployment) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& n : deployment.nodes) xy.emplace_back(n.x_m, n.y_m);
  double spacing = median_nearest_neighbor(xy);
  return spacing > 0.0 ? 3.0 * spacing : std::numeric_limits<double>::infinity();
}

FrameSequence frame_sequence(const Store& store, std::string_view deployment_id, Variable variable, Instant from,
                             Instant to, const FrameOptions& options) {
  auto manifest = store.manifest();
  const auto* dep = manifest.find_deployment(deployment_id);
  if (!dep) throw Error(ErrorCode::kUnknownDeployment, "unknown deployment: " + std::string(deployment_id));
  if (to < from) throw Error(ErrorCode::kInvertedRange, "frame range is inverted");
  if (options.step_s < dep->cadence_s) {
    throw Error(ErrorCode::kBadParams, "step must be at least the deployment cadence of " +
                                           std::to_string(dep->cadence_s) + " s");
  }

  struct Sensor {
    double x, y;
    std::string channel_id;
  };
  std::vector<Sensor> sensors;
  for (const auto& n : dep->nodes) {
    if (const auto* c = node_channel(n, variable)) sensors.push_back({n.x_m, n.y_m, c->channel_id});
  }
  if (sensors.empty()) {
    throw Error(ErrorCode::kUnknownVariable, "deployment " + dep->deployment_id + " has no " +
                                                 std::string(variable_name(variable)) + " channel");
  }

  FrameSequence seq;
  seq.deployment_id = dep->deployment_id;
  seq.variable = variable;
  seq.step_s = options.step_s;
  seq.power = options.power;
  seq.grid = options.grid ? *options.grid : default_grid(*dep);
  seq.cutoff_m = options.cutoff_m ? *options.cutoff_m : default_cutoff(*dep);
  check_grid(seq.grid);

  const std::int64_t span = to_epoch(to) - to_epoch(from);
  const std::size_t frames = static_cast<std::size_t>((span + options.step_s - 1) / options.step_s);

  // sums[frame][sensor]
  std::vector<std::vector<std::pair<double, std::size_t>>> sums(frames,
                                                                std::vector<std::pair<double, std::size_t>>(sensors.size()));
  auto excluded = query::default_exclusions();
  for (std::size_t s = 0; s < sensors.size(); ++s) {
    for (const auto& r : store.read_records(sensors[s].channel_id, from, to)) {
      if (!r.eng_value || r.flags.intersects(excluded)) continue;
      auto k = static_cast<std::size_t>((to_epoch(r.ts_utc) - to_epoch(from)) / options.step_s);
      sums[k][s].first += *r.eng_value;
      ++sums[k][s].second;
    }
  }

  seq.frames.reserve(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    GridFrame f;
    f.ts = from + std::chrono::seconds{static_cast<std::int64_t>(k) * options.step_s};
    f.grid = seq.grid;
    std::vector<ValuePoint> live;
    std::vector<AlivePoint> all;
    for (std::size_t s = 0; s < sensors.size(); ++s) {
      bool alive = sums[k][s].second > 0;
      all.push_back({sensors[s].x, sensors[s].y, alive});
      if (alive) live.push_back({sensors[s].x, sensors[s].y, sums[k][s].first / static_cast<double>(sums[k][s].second)});
    }
    if (live.empty()) {
      f.values.assign(seq.grid.cells(), std::nullopt);
    } else {
      f.values = idw_interpolate(live, seq.grid, seq.power, seq.cutoff_m);
    }
    f.reliability = reliability_map(all, seq.grid, seq.cutoff_m);
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

nlohmann::json sequence_manifest(const FrameSequence& seq) {
  nlohmann::json j;
  j["deployment_id"] = seq.deployment_id;
  j["variable"] = std::string(variable_name(seq.variable));
  j["step_s"] = seq.step_s;
  j["power"] = seq.power;
  j["cutoff_m"] = std::isfinite(seq.cutoff_m) ? nlohmann::json(seq.cutoff_m) : nlohmann::json(nullptr);
  j["grid"] = {{"origin_x", seq.grid.origin_x}, {"origin_y", seq.grid.origin_y}, {"cell_size", seq.grid.cell_size},
               {"nx", seq.grid.nx},             {"ny", seq.grid.ny}};
  auto ts = nlohmann::json::array();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& f : seq.frames) {
    ts.push_back(format_iso_utc(f.ts));
    for (const auto& v : f.values) {
      if (!v) continue;
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
  }
  j["timestamps"] = ts;
  j["frame_count"] = seq.frames.size();
  j["value_min"] = std::isfinite(lo) ? nlohmann::json(lo) : nlohmann::json(nullptr);
  j["value_max"] = std::isfinite(hi) ? nlohmann::json(hi) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const FrameSequence& seq) {
  auto j = sequence_manifest(seq);
  auto frames = nlohmann::json::array();
  for (const auto& f : seq.frames) {
    auto values = nlohmann::json::array();
    for (const auto& v : f.values) values.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
    frames.push_back({{"ts", format_iso_utc(f.ts)}, {"values", values}, {"reliability", f.reliability}});
  }
  j["frames"] = frames;
  return j;
}

std::string matrix_csv(const std::vector<std::optional<double>>& cells, const GridGeometry& grid) {
  std::string out;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (i) out += ',';
      const auto& v = cells[static_cast<std::size_t>(j) * grid.nx + i];
      if (v) out += cell_text(*v);
    }
    out += '\n';
  }
  return out;
}

std::string matrix_csv(const std::vector<double>& cells, const GridGeometry& grid) {
  std::vector<std::optional<double>> wrapped(cells.begin(), cells.end());
  return matrix_csv(wrapped, grid);
}

void export_frames(const FrameSequence& seq, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    f << content;
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + (dir / name).string());
  };
  auto manifest = sequence_manifest(seq);
  auto files = nlohmann::json::array();
  for (std::size_t k = 0; k < seq.frames.size(); ++k) {
    char suffix[32];
    std::snprintf(suffix, sizeof suffix, "%04zu.csv", k);
    std::string values = std::string("values_") + suffix, reliability = std::string("reliability_") + suffix;
    write(values, matrix_csv(seq.frames[k].values, seq.grid));
    write(reliability, matrix_csv(seq.frames[k].reliability, seq.grid));
    files.push_back({{"values", values}, {"reliability", reliability}});
  }
  manifest["files"] = files;
  write("frames.json", manifest.dump(2) + "\n");
}

}  // namespace envnet::spatial
