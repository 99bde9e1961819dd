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

#include "envnet/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "envnet/derive.hpp"
#include "envnet/error.hpp"
#include "envnet/store.hpp"
#include "envnet/timecal.hpp"

namespace envnet::simgen {

using namespace envnet::formats;

namespace {

[[noreturn]] void bad_params(const std::string& what) { throw Error(ErrorCode::kBadParams, what); }

struct ColumnKind {
  std::string_view token;
  Variable variable;
  Orientation orientation;
};

constexpr ColumnKind kColumns[] = {
    {"par_in", Variable::kPar, Orientation::kIncoming},
    {"par_refl", Variable::kPar, Orientation::kReflected},
    {"solar_in", Variable::kSolar, Orientation::kIncoming},
    {"solar_refl", Variable::kSolar, Orientation::kReflected},
    {"air_temp", Variable::kAirTemp, Orientation::kNone},
    {"rh", Variable::kRelHumidity, Orientation::kNone},
    {"rain", Variable::kRainfall, Orientation::kNone},
    {"soil_vwc", Variable::kSoilMoisture, Orientation::kNone},
    {"leaf_temp", Variable::kLeafTemp, Orientation::kNone},
};

const ColumnKind* column_kind(std::string_view token) {
  for (const auto& c : kColumns) {
    if (c.token == token) return &c;
  }
  return nullptr;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// mt19937_64 output is fixed by the standard; distributions are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b + 0x632BE59BD9B4E019ull));
}

std::string node_id_for(const SimDeployment& d, int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "-n%02d", index + 1);
  return d.deployment_id + buf;
}

Instant parse_time_field(const nlohmann::json& j, const std::string& field) {
  if (!j.is_string()) bad_params(field + " must be a date or ISO instant string");
  auto t = parse_instant_or_date(j.get<std::string>());
  if (!t) bad_params(field + " is not a date or ISO instant: " + j.get<std::string>());
  return *t;
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    bad_params(std::string("field ") + key + " has the wrong type");
  }
}

bool targets(const FaultSpec& f, const std::string& deployment_id, const std::string& node_id) {
  return f.target == "*" || f.target == deployment_id || f.target == node_id;
}

Instant fault_from(const SimSpec& s, const FaultSpec& f) { return f.from.value_or(s.start); }
Instant fault_to(const SimSpec& s, const FaultSpec& f) { return f.to.value_or(s.end()); }

struct RowDraft {
  std::string node_id;
  Instant true_ts;
  std::vector<std::string> fields;
};

struct FileDraft {
  std::string path;
  std::string header;
  Dialect dialect;
  std::size_t first_data_line = 0;
  std::vector<RowDraft> rows;
};

std::string header_for(const SimDeployment& d, const std::string& node_id, std::size_t& lines) {
  std::string h = dialect_signature(d.dialect) + "\n";
  lines = 1;
  std::string cols;
  for (const auto& c : d.columns) cols += "," + c;
  switch (d.dialect.kind) {
    case DialectKind::kWiredLogger:
      h += "# logger_sn=" + node_id + "\n# columns=" + std::to_string(d.columns.size()) + "\n";
      h += "ts_local" + cols + "\n";
      lines += 3;
      break;
    case DialectKind::kNodeLogger:
      h += "# node_sn=" + node_id + "\n";
      h += "ts_local" + cols + "\n";
      lines += 2;
      break;
    case DialectKind::kWirelessAggregator:
      h += "# deployment=" + d.deployment_id + "\n";
      h += "epoch_s,node_id" + cols + "\n";
      lines += 2;
      break;
  }
  return h;
}

}  // namespace

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kTransect: return "transect";
    case Strategy::kStar: return "star";
    case Strategy::kGrid: return "grid";
  }
  return "transect";
}

std::string_view fault_name(FaultKind k) {
  switch (k) {
    case FaultKind::kClockOffsetH: return "CLOCK_OFFSET_H";
    case FaultKind::kClockDriftMin: return "CLOCK_DRIFT_MIN";
    case FaultKind::kGap: return "GAP";
    case FaultKind::kMalformedRowsPct: return "MALFORMED_ROWS_PCT";
    case FaultKind::kColumnArity: return "COLUMN_ARITY";
    case FaultKind::kDstShift: return "DST_SHIFT";
  }
  return "GAP";
}

std::vector<std::pair<double, double>> place_nodes(Strategy strategy, const StrategyParams& params, int n) {
  if (n < 1) bad_params("node_count must be >= 1");
  std::vector<std::pair<double, double>> out;
  switch (strategy) {
    case Strategy::kTransect:
      if (!(params.spacing_m > 0.0)) bad_params("transect spacing_m must be > 0");
      for (int i = 0; i < n; ++i) out.emplace_back(i * params.spacing_m, 0.0);
      break;
    case Strategy::kStar: {
      if (params.radii.empty()) bad_params("star needs at least one radius");
      for (double r : params.radii) {
        if (!(r > 0.0)) bad_params("star radii must be > 0");
      }
      int rings = static_cast<int>(params.radii.size());
      if (n % rings != 0) bad_params("star node_count must divide evenly over the rings");
      int per_ring = n / rings;
      for (double r : params.radii) {
        for (int j = 0; j < per_ring; ++j) {
          double a = 2.0 * std::numbers::pi * j / per_ring;
          out.emplace_back(r * std::cos(a), r * std::sin(a));
        }
      }
      break;
    }
    case Strategy::kGrid:
      if (params.rows < 1 || params.cols < 1 || params.rows * params.cols != n) {
        bad_params("grid rows x cols must equal node_count");
      }
      if (!(params.spacing_m > 0.0)) bad_params("grid spacing_m must be > 0");
      for (int r = 0; r < params.rows; ++r) {
        for (int c = 0; c < params.cols; ++c) out.emplace_back(c * params.spacing_m, r * params.spacing_m);
      }
      break;
  }
  return out;
}

SimSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad_params("spec must be a JSON object");
  SimSpec s;
  s.seed = get_or<std::uint64_t>(j, "seed", 1);
  if (!j.contains("site") || !j["site"].is_object()) bad_params("site is required");
  const auto& site = j["site"];
  s.site.site_id = get_or<std::string>(site, "site_id", "");
  s.site.name = get_or<std::string>(site, "name", s.site.site_id);
  s.site.latitude = get_or<double>(site, "latitude", 0.0);
  s.site.longitude = get_or<double>(site, "longitude", 0.0);
  s.site.utc_offset_standard = get_or<int>(site, "utc_offset_standard", 0);
  try {
    validate_site(s.site);
  } catch (const Error& e) {
    bad_params(e.detail().empty() ? e.what() : e.detail());
  }
  if (!j.contains("start")) bad_params("start is required");
  s.start = parse_time_field(j["start"], "start");
  s.days = get_or<int>(j, "days", 1);
  if (s.days < 1) bad_params("days must be >= 1");
  s.cadence_s = get_or<std::int64_t>(j, "cadence_s", 900);
  if (s.cadence_s <= 0) bad_params("cadence_s must be > 0");
  s.par_max = get_or<double>(j, "par_max", 2000.0);
  s.solar_max = get_or<double>(j, "solar_max", 1000.0);
  s.noise = get_or<double>(j, "noise", 0.02);
  if (!(s.noise >= 0.0 && s.noise < 1.0)) bad_params("noise must be in [0, 1)");
  if (!(s.par_max > 0.0) || !(s.solar_max > derive::par_energy(s.par_max))) {
    bad_params("solar_max must exceed the energy of par_max");
  }
  if (j.contains("canopy")) {
    const auto& c = j["canopy"];
    s.canopy.rho_par = get_or<double>(c, "rho_par", s.canopy.rho_par);
    s.canopy.rho_nir = get_or<double>(c, "rho_nir", s.canopy.rho_nir);
    s.canopy.tau = get_or<double>(c, "tau", s.canopy.tau);
  }
  for (double v : {s.canopy.rho_par, s.canopy.rho_nir, s.canopy.tau}) {
    if (!(v >= 0.0 && v <= 1.0)) bad_params("canopy fractions must be in [0, 1]");
  }

  if (!j.contains("deployments") || !j["deployments"].is_array() || j["deployments"].empty()) {
    bad_params("deployments must be a non-empty array");
  }
  for (const auto& dj : j["deployments"]) {
    SimDeployment d;
    d.deployment_id = get_or<std::string>(dj, "deployment_id", "");
    if (d.deployment_id.empty()) bad_params("deployment_id is required");
    auto kind = parse_deployment_kind(get_or<std::string>(dj, "kind", "understory"));
    if (!kind) bad_params("deployment kind must be tower or understory");
    d.kind = *kind;
    auto dialect = parse_dialect_name(get_or<std::string>(dj, "dialect", "WIRELESS_AGGREGATOR"));
    if (!dialect) bad_params("unknown dialect in deployment " + d.deployment_id);
    d.dialect = {*dialect, get_or<int>(dj, "dialect_version", 1)};
    if (d.dialect.version < 1 || d.dialect.version > kMaxDialectVersion) bad_params("unsupported dialect_version");
    auto strategy = get_or<std::string>(dj, "strategy", "transect");
    if (strategy == "transect") d.strategy = Strategy::kTransect;
    else if (strategy == "star") d.strategy = Strategy::kStar;
    else if (strategy == "grid") d.strategy = Strategy::kGrid;
    else bad_params("strategy must be transect, star or grid");
    d.params.spacing_m = get_or<double>(dj, "spacing_m", 10.0);
    d.params.radii = get_or<std::vector<double>>(dj, "radii", {});
    d.params.rows = get_or<int>(dj, "rows", 0);
    d.params.cols = get_or<int>(dj, "cols", 0);
    d.node_count = get_or<int>(dj, "node_count", 1);
    d.height_m = get_or<double>(dj, "height_m", d.kind == DeploymentKind::kTower ? 20.0 : 2.0);
    d.columns = get_or<std::vector<std::string>>(dj, "columns", {});
    if (d.columns.empty()) bad_params("deployment " + d.deployment_id + " has no columns");
    std::set<std::string> seen;
    for (const auto& c : d.columns) {
      if (!column_kind(c)) bad_params("unknown column token: " + c);
      if (!seen.insert(c).second) bad_params("duplicate column token: " + c);
    }
    place_nodes(d.strategy, d.params, d.node_count);
    s.deployments.push_back(std::move(d));
  }

  if (j.contains("faults")) {
    if (!j["faults"].is_array()) bad_params("faults must be an array");
    for (const auto& fj : j["faults"]) {
      FaultSpec f;
      auto kind = get_or<std::string>(fj, "kind", "");
      bool found = false;
      for (auto k : {FaultKind::kClockOffsetH, FaultKind::kClockDriftMin, FaultKind::kGap,
                     FaultKind::kMalformedRowsPct, FaultKind::kColumnArity, FaultKind::kDstShift}) {
        if (fault_name(k) == kind) {
          f.kind = k;
          found = true;
        }
      }
      if (!found) bad_params("unknown fault kind: " + kind);
      f.target = get_or<std::string>(fj, "target", "*");
      if (fj.contains("from")) f.from = parse_time_field(fj["from"], "fault from");
      if (fj.contains("to")) f.to = parse_time_field(fj["to"], "fault to");
      f.magnitude = get_or<double>(fj, "magnitude", f.kind == FaultKind::kDstShift ? 1.0 : 0.0);
      s.faults.push_back(std::move(f));
    }
  }

  auto manifest = build_manifest(s);
  for (const auto& f : s.faults) {
    auto from = fault_from(s, f), to = fault_to(s, f);
    if (from < s.start || to > s.end() || !(from < to)) {
      bad_params(std::string(fault_name(f.kind)) + " window must be non-empty and inside the simulated range");
    }
    if (f.target != "*" && !manifest.find_deployment(f.target) && !manifest.find_node(f.target)) {
      bad_params("fault target matches no deployment or node: " + f.target);
    }
    if ((f.kind == FaultKind::kMalformedRowsPct || f.kind == FaultKind::kColumnArity) &&
        !(f.magnitude >= 0.0 && f.magnitude <= 100.0)) {
      bad_params(std::string(fault_name(f.kind)) + " magnitude is a percentage");
    }
    if ((f.kind == FaultKind::kClockOffsetH || f.kind == FaultKind::kDstShift) &&
        f.magnitude != std::round(f.magnitude)) {
      bad_params(std::string(fault_name(f.kind)) + " magnitude must be whole hours");
    }
  }
  return s;
}

nlohmann::json to_json(const SimSpec& s) {
  nlohmann::json j;
  j["seed"] = s.seed;
  j["site"] = {{"site_id", s.site.site_id},
               {"name", s.site.name},
               {"latitude", s.site.latitude},
               {"longitude", s.site.longitude},
               {"utc_offset_standard", s.site.utc_offset_standard}};
  j["start"] = format_iso_utc(s.start);
  j["days"] = s.days;
  j["cadence_s"] = s.cadence_s;
  j["par_max"] = s.par_max;
  j["solar_max"] = s.solar_max;
  j["noise"] = s.noise;
  j["canopy"] = {{"rho_par", s.canopy.rho_par}, {"rho_nir", s.canopy.rho_nir}, {"tau", s.canopy.tau}};
  auto deps = nlohmann::json::array();
  for (const auto& d : s.deployments) {
    nlohmann::json dj = {{"deployment_id", d.deployment_id},
                         {"kind", std::string(deployment_kind_name(d.kind))},
                         {"dialect", std::string(dialect_name(d.dialect.kind))},
                         {"dialect_version", d.dialect.version},
                         {"strategy", std::string(strategy_name(d.strategy))},
                         {"spacing_m", d.params.spacing_m},
                         {"node_count", d.node_count},
                         {"height_m", d.height_m},
                         {"columns", d.columns}};
    if (!d.params.radii.empty()) dj["radii"] = d.params.radii;
    if (d.params.rows) dj["rows"] = d.params.rows;
    if (d.params.cols) dj["cols"] = d.params.cols;
    deps.push_back(dj);
  }
  j["deployments"] = deps;
  auto faults = nlohmann::json::array();
  for (const auto& f : s.faults) {
    nlohmann::json fj = {{"kind", std::string(fault_name(f.kind))}, {"target", f.target}, {"magnitude", f.magnitude}};
    if (f.from) fj["from"] = format_iso_utc(*f.from);
    if (f.to) fj["to"] = format_iso_utc(*f.to);
    faults.push_back(fj);
  }
  j["faults"] = faults;
  return j;
}

Manifest build_manifest(const SimSpec& spec) {
  Manifest m;
  m.upsert_site(spec.site);
  for (const auto& sd : spec.deployments) {
    Deployment d;
    d.deployment_id = sd.deployment_id;
    d.site_id = spec.site.site_id;
    d.kind = sd.kind;
    d.cadence_s = spec.cadence_s;
    auto xy = place_nodes(sd.strategy, sd.params, sd.node_count);
    for (int i = 0; i < sd.node_count; ++i) {
      NodeDescriptor n;
      n.node_id = node_id_for(sd, i);
      n.x_m = xy[static_cast<std::size_t>(i)].first;
      n.y_m = xy[static_cast<std::size_t>(i)].second;
      n.height_m = sd.height_m;
      for (const auto& c : sd.columns) {
        const auto* k = column_kind(c);
        n.channels.push_back(default_channel(k->variable, k->orientation, n.node_id + "." + c, c));
      }
      d.nodes.push_back(std::move(n));
    }
    m.upsert_deployment(std::move(d));
  }
  return m;
}

ClearSky clear_sky(const SimSpec& spec, Instant utc) {
  ClearSky c;
  c.cos_zenith = timecal::cos_solar_zenith(spec.site.latitude, spec.site.longitude, spec.site.utc_offset_standard, utc);
  // Daylight starts at apparent sunrise, the same zenith timecal predicts.
  const double horizon = std::cos(timecal::kSunriseZenithDeg * std::numbers::pi / 180.0);
  double sun = std::max(0.0, (c.cos_zenith - horizon) / (1.0 - horizon));
  c.par_in = spec.par_max * sun;
  c.solar_in = spec.solar_max * sun;
  return c;
}

SimOutput generate(const SimSpec& spec) {
  SimOutput out;
  out.manifest = build_manifest(spec);
  out.truth.seed = spec.seed;
  const std::int64_t steps = (to_epoch(spec.end()) - to_epoch(spec.start)) / spec.cadence_s;
  const int offset = spec.site.utc_offset_standard;
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<FileDraft> files;
  for (std::size_t di = 0; di < spec.deployments.size(); ++di) {
    const auto& sd = spec.deployments[di];
    const auto* dep = out.manifest.find_deployment(sd.deployment_id);
    const bool aggregator = sd.dialect.kind == DialectKind::kWirelessAggregator;
    const bool understory = sd.kind == DeploymentKind::kUnderstory;

    std::vector<FileDraft*> node_file(dep->nodes.size());
    if (aggregator) {
      FileDraft f;
      f.path = sd.deployment_id + "/aggregator.csv";
      f.dialect = sd.dialect;
      f.header = header_for(sd, "", f.first_data_line);
      files.push_back(std::move(f));
    } else {
      for (const auto& n : dep->nodes) {
        FileDraft f;
        f.path = sd.deployment_id + "/" + n.node_id + ".csv";
        f.dialect = sd.dialect;
        f.header = header_for(sd, n.node_id, f.first_data_line);
        files.push_back(std::move(f));
      }
    }
    const std::size_t first_file = files.size() - (aggregator ? 1 : dep->nodes.size());

    // Per node: value streams, clock faults, gap lattice.
    struct NodeState {
      std::vector<Rng> streams;
      std::vector<bool> missing;
      std::vector<const FaultSpec*> clocks;
    };
    std::vector<NodeState> nodes(dep->nodes.size());
    for (std::size_t ni = 0; ni < dep->nodes.size(); ++ni) {
      const auto& node = dep->nodes[ni];
      auto& st = nodes[ni];
      for (std::size_t ci = 0; ci < sd.columns.size(); ++ci) {
        st.streams.emplace_back(stream_seed(spec.seed, (di << 16) | ni, ci));
      }
      st.missing.assign(static_cast<std::size_t>(steps), false);
      for (const auto& f : spec.faults) {
        if (!targets(f, sd.deployment_id, node.node_id)) continue;
        auto from = fault_from(spec, f), to = fault_to(spec, f);
        if (f.kind == FaultKind::kGap) {
          for (std::int64_t k = 0; k < steps; ++k) {
            auto t = spec.start + std::chrono::seconds{k * spec.cadence_s};
            if (t >= from && t < to) st.missing[static_cast<std::size_t>(k)] = true;
          }
        } else if (f.kind == FaultKind::kClockOffsetH || f.kind == FaultKind::kClockDriftMin ||
                   f.kind == FaultKind::kDstShift) {
          st.clocks.push_back(&f);
          out.truth.clocks.push_back({f.kind, node.node_id, from, to, f.magnitude});
        }
      }
      for (std::int64_t k = 0; k < steps;) {
        if (!st.missing[static_cast<std::size_t>(k)]) {
          ++k;
          continue;
        }
        std::int64_t first = k;
        while (k < steps && st.missing[static_cast<std::size_t>(k)]) ++k;
        for (const auto& c : node.channels) {
          out.truth.gaps.push_back({c.channel_id, spec.start + std::chrono::seconds{first * spec.cadence_s},
                                    spec.start + std::chrono::seconds{(k - 1) * spec.cadence_s}, k - first});
        }
      }
    }

    for (std::int64_t k = 0; k < steps; ++k) {
      const Instant t = spec.start + std::chrono::seconds{k * spec.cadence_s};
      const auto sky = clear_sky(spec, t);
      const double par_in_true = understory ? sky.par_in * spec.canopy.tau : sky.par_in;
      const double solar_in_true = understory ? sky.solar_in * spec.canopy.tau : sky.solar_in;
      const double par_e = derive::par_energy(par_in_true);
      const double hour = local_minute_of_day(t, offset) / 60.0;
      const double diurnal = std::sin(two_pi * (hour - 9.0) / 24.0);
      const double week = std::sin(two_pi * static_cast<double>(k * spec.cadence_s) / (7.0 * 86400.0));

      for (std::size_t ni = 0; ni < dep->nodes.size(); ++ni) {
        auto& st = nodes[ni];
        RowDraft row;
        row.node_id = dep->nodes[ni].node_id;
        row.true_ts = t;

        // Clock faults act on the timestamp the logger writes.
        std::int64_t shift_s = 0;
        for (const auto* f : st.clocks) {
          auto from = fault_from(spec, *f), to = fault_to(spec, *f);
          if (t < from || t >= to) continue;
          if (f->kind == FaultKind::kClockDriftMin) {
            double frac = static_cast<double>(to_epoch(t) - to_epoch(from)) /
                          static_cast<double>(to_epoch(to) - to_epoch(from));
            shift_s += std::llround(f->magnitude * 60.0 * frac);
          } else {
            shift_s += std::llround(f->magnitude) * 3600;
          }
        }
        auto written = to_local(t, offset) + std::chrono::seconds{shift_s};
        if (aggregator) {
          row.fields.push_back(std::to_string(written.time_since_epoch().count()));
          row.fields.push_back(row.node_id);
        } else {
          row.fields.push_back(format_local(written));
        }

        for (std::size_t ci = 0; ci < sd.columns.size(); ++ci) {
          auto& rng = st.streams[ci];
          const double noise = 1.0 + spec.noise * (2.0 * rng.uniform() - 1.0);
          const double extra = rng.uniform();
          const auto token = std::string_view(sd.columns[ci]);
          double value = 0.0;
          if (token == "par_in") value = par_in_true * noise;
          else if (token == "par_refl") value = par_in_true * spec.canopy.rho_par * noise;
          else if (token == "solar_in") value = solar_in_true * noise;
          else if (token == "solar_refl")
            value = (par_e * spec.canopy.rho_par + (solar_in_true - par_e) * spec.canopy.rho_nir) * noise;
          else if (token == "air_temp") value = (25.0 + 6.0 * diurnal) * noise;
          else if (token == "leaf_temp") value = (26.0 + 6.0 * diurnal) * noise;
          else if (token == "rh") value = (70.0 - 20.0 * diurnal) * noise;
          else if (token == "soil_vwc") value = ((25.0 + 2.0 * week) * noise + 20.0) / 0.1;  // millivolts
          else if (token == "rain") value = extra < 0.01 ? 1.0 + std::floor(extra * 400.0) : 0.0;  // tips
          if (!st.missing[static_cast<std::size_t>(k)]) row.fields.push_back(format_value(value));
        }
        if (st.missing[static_cast<std::size_t>(k)]) continue;
        files[first_file + (aggregator ? 0 : ni)].rows.push_back(std::move(row));
      }
    }
  }

  // Row faults: distinct rows per file, chosen without replacement.
  for (std::size_t fi = 0; fi < spec.faults.size(); ++fi) {
    const auto& f = spec.faults[fi];
    if (f.kind != FaultKind::kMalformedRowsPct && f.kind != FaultKind::kColumnArity) continue;
    Rng rng(stream_seed(spec.seed, 0xFA017ull, fi));
    for (auto& file : files) {
      const auto dep_id = file.path.substr(0, file.path.find('/'));
      std::vector<std::size_t> eligible;
      std::set<std::size_t> taken;
      for (const auto& m : out.truth.malformed) {
        if (m.file == file.path) taken.insert(m.line - file.first_data_line - 1);
      }
      auto from = fault_from(spec, f), to = fault_to(spec, f);
      for (std::size_t r = 0; r < file.rows.size(); ++r) {
        const auto& row = file.rows[r];
        if (!targets(f, dep_id, row.node_id) || taken.count(r)) continue;
        if (row.true_ts < from || row.true_ts >= to) continue;
        eligible.push_back(r);
      }
      auto count = static_cast<std::size_t>(std::llround(f.magnitude / 100.0 * static_cast<double>(eligible.size())));
      for (std::size_t c = 0; c < count; ++c) {
        std::size_t pick = c + rng.below(eligible.size() - c);
        std::swap(eligible[c], eligible[pick]);
      }
      eligible.resize(count);
      std::sort(eligible.begin(), eligible.end());
      const std::size_t prefix = file.dialect.kind == DialectKind::kWirelessAggregator ? 2 : 1;
      for (auto r : eligible) {
        auto& row = file.rows[r];
        TruthRow truth{file.path, file.first_data_line + r + 1, RowErrorKind::kCorruptValue, row.node_id};
        if (f.kind == FaultKind::kMalformedRowsPct) {
          std::size_t col = prefix + rng.below(row.fields.size() - prefix);
          row.fields[col] = "T@#k";
        } else {
          truth.kind = RowErrorKind::kArity;
          if (rng.uniform() < 0.5) row.fields.push_back("0");
          else row.fields.pop_back();
        }
        out.truth.malformed.push_back(std::move(truth));
      }
    }
  }
  std::sort(out.truth.malformed.begin(), out.truth.malformed.end(),
            [](const TruthRow& a, const TruthRow& b) { return std::tie(a.file, a.line) < std::tie(b.file, b.line); });

  for (auto& file : files) {
    std::string bytes = file.header;
    for (const auto& row : file.rows) {
      std::string body;
      for (std::size_t i = 0; i < row.fields.size(); ++i) {
        if (i) body += ',';
        body += row.fields[i];
      }
      bytes += finish_row(file.dialect, body);
      bytes += '\n';
    }
    out.truth.data_rows[file.path] = file.rows.size();
    out.files.emplace(file.path, std::move(bytes));
  }
  return out;
}

nlohmann::json GroundTruth::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  auto clocks_j = nlohmann::json::array();
  for (const auto& c : clocks) {
    clocks_j.push_back({{"kind", std::string(fault_name(c.kind))},
                        {"node_id", c.node_id},
                        {"from", format_iso_utc(c.from)},
                        {"to", format_iso_utc(c.to)},
                        {"magnitude", c.magnitude}});
  }
  j["clocks"] = clocks_j;
  auto gaps_j = nlohmann::json::array();
  for (const auto& g : gaps) {
    gaps_j.push_back({{"channel_id", g.channel_id},
                      {"start_utc", format_iso_utc(g.start)},
                      {"end_utc", format_iso_utc(g.end)},
                      {"missing_count", g.missing_count}});
  }
  j["gaps"] = gaps_j;
  auto rows_j = nlohmann::json::array();
  for (const auto& r : malformed) {
    rows_j.push_back({{"file", r.file}, {"line", r.line}, {"kind", std::string(row_error_name(r.kind))},
                      {"node_id", r.node_id}});
  }
  j["malformed"] = rows_j;
  j["data_rows"] = data_rows;
  return j;
}

GroundTruth GroundTruth::from_json(const nlohmann::json& j) {
  GroundTruth t;
  try {
    t.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& c : j.at("clocks")) {
      TruthClock tc;
      auto kind = c.at("kind").get<std::string>();
      for (auto k : {FaultKind::kClockOffsetH, FaultKind::kClockDriftMin, FaultKind::kDstShift}) {
        if (fault_name(k) == kind) tc.kind = k;
      }
      tc.node_id = c.at("node_id").get<std::string>();
      tc.from = parse_iso_utc(c.at("from").get<std::string>()).value();
      tc.to = parse_iso_utc(c.at("to").get<std::string>()).value();
      tc.magnitude = c.at("magnitude").get<double>();
      t.clocks.push_back(tc);
    }
    for (const auto& g : j.at("gaps")) {
      t.gaps.push_back({g.at("channel_id").get<std::string>(),
                        parse_iso_utc(g.at("start_utc").get<std::string>()).value(),
                        parse_iso_utc(g.at("end_utc").get<std::string>()).value(),
                        g.at("missing_count").get<std::int64_t>()});
    }
    for (const auto& r : j.at("malformed")) {
      TruthRow tr;
      tr.file = r.at("file").get<std::string>();
      tr.line = r.at("line").get<std::size_t>();
      tr.kind = r.at("kind").get<std::string>() == "ARITY" ? RowErrorKind::kArity : RowErrorKind::kCorruptValue;
      tr.node_id = r.at("node_id").get<std::string>();
      t.malformed.push_back(tr);
    }
    t.data_rows = j.at("data_rows").get<std::map<std::string, std::size_t>>();
  } catch (const std::exception& e) {
    bad_params(std::string("bad ground truth ledger: ") + e.what());
  }
  return t;
}

void write_output(const SimOutput& out, const std::filesystem::path& dir) {
  auto write = [&](const std::filesystem::path& rel, const std::string& content) {
    auto path = dir / rel;
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + path.parent_path().string() + ": " + ec.message());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << content;
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  };
  for (const auto& [rel, bytes] : out.files) write(rel, bytes);
  write(kManifestName, out.manifest.to_json().dump(2) + "\n");
  write(kTruthName, out.truth.to_json().dump(2) + "\n");
}

}  // namespace envnet::simgen
