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

#include "envnet/derive.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "envnet/error.hpp"

namespace envnet::derive {

namespace {

const ChannelDescriptor* find_channel(const NodeDescriptor& node, Variable v, Orientation o) {
  for (const auto& c : node.channels) {
    if (c.variable == v && c.orientation == o) return &c;
  }
  return nullptr;
}

const ChannelDescriptor& require_channel(const NodeDescriptor& node, Variable v, Orientation o) {
  const auto* c = find_channel(node, v, o);
  if (!c) {
    throw Error(ErrorCode::kUnknownChannel, "node " + node.node_id + " has no " + std::string(variable_name(v)) +
                                                "/" + std::string(orientation_name(o)) + " channel");
  }
  return *c;
}

using Series = std::map<std::int64_t, SensorRecord>;

Series load(const Store& store, const ChannelDescriptor& c, Instant from, Instant to) {
  Series s;
  for (auto& r : store.read_records(c.channel_id, from, to)) {
    if (r.eng_value) s.emplace(to_epoch(r.ts_utc), r);
  }
  return s;
}

// Incoming PAR above the canopy: first tower deployment at the same site.
const ChannelDescriptor& above_canopy_par(const Manifest& manifest, const Site& site) {
  for (const auto& d : manifest.deployments()) {
    if (d.kind != DeploymentKind::kTower || d.site_id != site.site_id) continue;
    for (const auto& n : d.nodes) {
      if (const auto* c = find_channel(n, Variable::kPar, Orientation::kIncoming)) return *c;
    }
  }
  throw Error(ErrorCode::kUnknownChannel, "site " + site.site_id + " has no tower with incoming PAR");
}

SensorRecord make_record(Instant ts, double value, FlagSet flags) {
  SensorRecord r;
  r.ts_utc = ts;
  r.raw_value = value;
  r.eng_value = value;
  r.flags = flags;
  return r;
}

}  // namespace

double par_energy(double par_flux, double umol_per_joule) { return par_flux / umol_per_joule; }

IndexPoint broadband_ndvi(const RadiationQuadruple& q, double umol_per_joule) {
  const double eps_energy = 1.0;
  double nir_in = q.pyr_in - par_energy(q.par_in, umol_per_joule);
  if (!(par_energy(q.par_in, umol_per_joule) > eps_energy) || !(nir_in > eps_energy)) {
    throw Error(ErrorCode::kNightOrDegenerate, "incoming radiation too low for an index");
  }
  IndexPoint p;
  p.ts = q.ts;
  p.rho_par = q.par_refl / q.par_in;
  p.rho_nir = (q.pyr_refl - par_energy(q.par_refl, umol_per_joule)) / nir_in;
  double denom = p.rho_nir + p.rho_par;
  if (denom > 0.0) {
    p.ndvi = (p.rho_nir - p.rho_par) / denom;
  } else {
    p.ndvi = 0.0;
    p.clamped = true;
  }
  if (p.ndvi > 1.0 || p.ndvi < -1.0) {
    p.ndvi = std::clamp(p.ndvi, -1.0, 1.0);
    p.clamped = true;
  }
  p.evi2 = evi2(p.rho_nir, p.rho_par);
  return p;
}

double evi2(double rho_nir, double rho_par) {
  return 2.5 * (rho_nir - rho_par) / (rho_nir + 2.4 * rho_par + 1.0);
}

CanopyLight fapar_and_lai(double par_above, double par_understory, double extinction) {
  if (!(extinction > 0.0)) throw Error(ErrorCode::kInvalidArgument, "extinction coefficient must be > 0");
  if (!(par_above > kMcCree)) throw Error(ErrorCode::kNightOrDegenerate, "above-canopy PAR too low");
  CanopyLight out;
  double tau = par_understory / par_above;
  if (tau > 1.0) {
    tau = 1.0;
    out.flagged = true;
  }
  if (tau < 0.0) {
    tau = 0.0;
    out.flagged = true;
  }
  out.transmittance = tau;
  out.fapar = 1.0 - tau;
  if (tau <= 0.0) {
    out.lai = kLaiMax;
    out.capped = true;
  } else {
    out.lai = -std::log(tau) / extinction;
    if (out.lai > kLaiMax) {
      out.lai = kLaiMax;
      out.capped = true;
    }
  }
  return out;
}

double vpd(double temp_c, double rh_pct) {
  double es = 0.6108 * std::exp(17.27 * temp_c / (temp_c + 237.3));
  return std::max(0.0, es * (1.0 - rh_pct / 100.0));
}

double footprint_radius(double height_m) {
  return std::tan(kFootprintViewAngleDeg * std::numbers::pi / 180.0) * height_m;
}

std::string_view product_name(Product p) {
  switch (p) {
    case Product::kNdvi: return "ndvi";
    case Product::kEvi2: return "evi2";
    case Product::kFapar: return "fapar";
    case Product::kLai: return "lai";
    case Product::kVpd: return "vpd";
  }
  return "unknown";
}

std::optional<Product> parse_product(std::string_view name) {
  for (auto p : {Product::kNdvi, Product::kEvi2, Product::kFapar, Product::kLai, Product::kVpd}) {
    if (product_name(p) == name) return p;
  }
  return std::nullopt;
}

std::string DerivedChannel::id() const { return "derived:" + std::string(product_name(product)) + ":" + node_id; }

std::optional<DerivedChannel> parse_derived_channel(std::string_view channel_id) {
  constexpr std::string_view kPrefix = "derived:";
  if (channel_id.substr(0, kPrefix.size()) != kPrefix) return std::nullopt;
  auto rest = channel_id.substr(kPrefix.size());
  auto colon = rest.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto product = parse_product(rest.substr(0, colon));
  if (!product || colon + 1 >= rest.size()) return std::nullopt;
  return DerivedChannel{*product, std::string(rest.substr(colon + 1))};
}

ChannelRef derived_context(const Manifest& manifest, const DerivedChannel& channel) {
  auto ref = manifest.find_node(channel.node_id);
  if (!ref) throw Error(ErrorCode::kUnknownChannel, "unknown node in derived channel " + channel.id());
  return *ref;
}

std::vector<SensorRecord> derived_records(const Store& store, const Manifest& manifest,
                                          const DerivedChannel& channel, Instant from, Instant to) {
  auto ref = derived_context(manifest, channel);
  const auto& node = *ref.node;
  std::vector<SensorRecord> out;

  switch (channel.product) {
    case Product::kNdvi:
    case Product::kEvi2: {
      auto par_in = load(store, require_channel(node, Variable::kPar, Orientation::kIncoming), from, to);
      auto par_refl = load(store, require_channel(node, Variable::kPar, Orientation::kReflected), from, to);
      auto pyr_in = load(store, require_channel(node, Variable::kSolar, Orientation::kIncoming), from, to);
      auto pyr_refl = load(store, require_channel(node, Variable::kSolar, Orientation::kReflected), from, to);
      for (const auto& [t, pi] : par_in) {
        auto a = par_refl.find(t), b = pyr_in.find(t), c = pyr_refl.find(t);
        if (a == par_refl.end() || b == pyr_in.end() || c == pyr_refl.end()) continue;
        RadiationQuadruple q{*pi.eng_value, *a->second.eng_value, *b->second.eng_value, *c->second.eng_value,
                             pi.ts_utc};
        IndexPoint p;
        try {
          p = broadband_ndvi(q);
        } catch (const Error& e) {
          if (e.code() == ErrorCode::kNightOrDegenerate) continue;
          throw;
        }
        FlagSet flags = pi.flags | a->second.flags | b->second.flags | c->second.flags;
        if (p.clamped) flags.insert(QualityFlag::kOutOfRange);
        out.push_back(make_record(pi.ts_utc, channel.product == Product::kNdvi ? p.ndvi : p.evi2, flags));
      }
      break;
    }
    case Product::kFapar:
    case Product::kLai: {
      auto below = load(store, require_channel(node, Variable::kPar, Orientation::kIncoming), from, to);
      auto above = load(store, above_canopy_par(manifest, *ref.site), from, to);
      for (const auto& [t, u] : below) {
        auto a = above.find(t);
        if (a == above.end()) continue;
        CanopyLight light;
        try {
          light = fapar_and_lai(*a->second.eng_value, *u.eng_value);
        } catch (const Error& e) {
          if (e.code() == ErrorCode::kNightOrDegenerate) continue;
          throw;
        }
        FlagSet flags = u.flags | a->second.flags;
        if (light.capped || light.flagged) flags.insert(QualityFlag::kOutOfRange);
        out.push_back(make_record(u.ts_utc, channel.product == Product::kFapar ? light.fapar : light.lai, flags));
      }
      break;
    }
    case Product::kVpd: {
      auto temp = load(store, require_channel(node, Variable::kAirTemp, Orientation::kNone), from, to);
      auto rh = load(store, require_channel(node, Variable::kRelHumidity, Orientation::kNone), from, to);
      for (const auto& [t, tr] : temp) {
        auto h = rh.find(t);
        if (h == rh.end()) continue;
        double rh_pct = std::clamp(*h->second.eng_value, 0.0, 100.0);
        out.push_back(make_record(tr.ts_utc, vpd(*tr.eng_value, rh_pct), tr.flags | h->second.flags));
      }
      break;
    }
  }
  return out;
}

}  // namespace envnet::derive
