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

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "envnet/ingest.hpp"
#include "envnet/manifest.hpp"
#include "envnet/simgen.hpp"
#include "envnet/store.hpp"

namespace envnet::testing {

// Directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "envnet") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(ENVNET_FIXTURE_DIR) / name;
}

// Mata Seca dry forest, the reference deployment site.
inline nlohmann::json mata_seca_site() {
  return {{"site_id", "mata-seca"},
          {"name", "Mata Seca"},
          {"latitude", -14.85},
          {"longitude", -43.97},
          {"utc_offset_standard", -180}};
}

inline nlohmann::json understory_deployment(const std::string& id, int nodes, std::vector<std::string> columns,
                                            const std::string& dialect = "WIRELESS_AGGREGATOR", int version = 1) {
  nlohmann::json d = {{"deployment_id", id},     {"kind", "understory"}, {"dialect", dialect},
                      {"dialect_version", version}, {"node_count", nodes}, {"columns", columns}};
  if (nodes % 2 == 0 && nodes >= 2) {
    d["strategy"] = "star";
    d["radii"] = {10.0, 20.0};
  } else {
    d["strategy"] = "transect";
    d["spacing_m"] = 10.0;
  }
  return d;
}

inline nlohmann::json tower_deployment(const std::string& id, const std::string& dialect = "WIRED_LOGGER",
                                       int version = 1) {
  return {{"deployment_id", id},
          {"kind", "tower"},
          {"dialect", dialect},
          {"dialect_version", version},
          {"node_count", 1},
          {"height_m", 25.0},
          {"columns", {"par_in", "par_refl", "solar_in", "solar_refl", "air_temp", "rh"}}};
}

inline nlohmann::json sim_spec(std::uint64_t seed, const std::string& start, int days,
                               std::vector<nlohmann::json> deployments, std::vector<nlohmann::json> faults = {}) {
  return {{"seed", seed},
          {"site", mata_seca_site()},
          {"start", start},
          {"days", days},
          {"cadence_s", 900},
          {"deployments", deployments},
          {"faults", faults}};
}

// Creates a store holding the simulation's manifest and ingests every file.
inline std::vector<ingest::IngestResult> load_simulation(Store& store, const simgen::SimOutput& out) {
  auto batch = store.begin_write();
  batch.set_manifest(out.manifest);
  batch.commit();
  std::vector<ingest::IngestResult> results;
  for (const auto& [path, bytes] : out.files) results.push_back(ingest::ingest_file(store, bytes, path, "test", {}));
  return results;
}

// Every file under root with its bytes, for before/after comparisons.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    auto rel = std::filesystem::relative(e.path(), root).string();
    if (rel == ".lock") continue;
    out[rel] = slurp(e.path());
  }
  return out;
}

inline CivilDate ymd(int y, unsigned m, unsigned d) {
  return CivilDate{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

inline Instant utc(const std::string& iso) { return parse_instant_or_date(iso).value(); }

}  // namespace envnet::testing
