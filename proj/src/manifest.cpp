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

#include "envnet/manifest.hpp"

#include <algorithm>
#include <set>

#include "envnet/error.hpp"

namespace envnet {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::kInvalidManifest, what); }

template <typename T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) invalid(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    invalid(std::string("bad type for field '") + key + "'");
  }
}

json calibration_to_json(const CalibrationSpec& c) {
  return {{"kind", calibration_kind_name(c.kind)}, {"scale", c.scale}, {"offset", c.offset}};
}

CalibrationSpec calibration_from_json(const json& j) {
  CalibrationSpec c;
  auto kind = parse_calibration_kind(field<std::string>(j, "kind"));
  if (!kind) invalid("unknown calibration kind");
  c.kind = *kind;
  c.scale = j.value("scale", 1.0);
  c.offset = j.value("offset", 0.0);
  return c;
}

json channel_to_json(const ChannelDescriptor& c) {
  return {{"channel_id", c.channel_id},
          {"column", c.column},
          {"variable", variable_name(c.variable)},
          {"orientation", orientation_name(c.orientation)},
          {"valid_min", c.valid_min},
          {"valid_max", c.valid_max},
          {"raw_unit", c.raw_unit},
          {"calibration", calibration_to_json(c.calibration)}};
}

ChannelDescriptor channel_from_json(const json& j) {
  ChannelDescriptor c;
  c.channel_id = field<std::string>(j, "channel_id");
  c.column = field<std::string>(j, "column");
  auto var = parse_variable(field<std::string>(j, "variable"));
  if (!var) invalid("channel " + c.channel_id + ": unknown variable");
  c.variable = *var;
  auto orient = parse_orientation(j.value("orientation", std::string("none")));
  if (!orient) invalid("channel " + c.channel_id + ": unknown orientation");
  c.orientation = *orient;
  auto defaults = default_channel(c.variable, c.orientation, c.channel_id, c.column);
  c.valid_min = j.value("valid_min", defaults.valid_min);
  c.valid_max = j.value("valid_max", defaults.valid_max);
  c.raw_unit = j.value("raw_unit", defaults.raw_unit);
  c.calibration = j.contains("calibration") ? calibration_from_json(j.at("calibration")) : defaults.calibration;
  return c;
}

}  // namespace

void Manifest::reindex() {
  channels_.clear();
  nodes_.clear();
  for (const auto& d : deployments_) {
    const Site* site = find_site(d.site_id);
    for (const auto& n : d.nodes) {
      nodes_[n.node_id] = ChannelRef{site, &d, &n, nullptr};
      for (const auto& c : n.channels) channels_[c.channel_id] = ChannelRef{site, &d, &n, &c};
    }
  }
}

void Manifest::upsert_site(Site site) {
  validate_site(site);
  auto it = std::find_if(sites_.begin(), sites_.end(),
                         [&](const Site& s) { return s.site_id == site.site_id; });
  if (it != sites_.end()) {
    *it = std::move(site);
  } else {
    sites_.push_back(std::move(site));
  }
  reindex();
}

void Manifest::upsert_deployment(Deployment deployment) {
  validate_deployment(deployment);
  if (!find_site(deployment.site_id)) {
    invalid("deployment " + deployment.deployment_id + " references unknown site " + deployment.site_id);
  }
  std::set<std::string> node_ids, channel_ids;
  for (const auto& n : deployment.nodes) {
    if (!node_ids.insert(n.node_id).second) invalid("duplicate node_id " + n.node_id);
    std::set<std::string> columns;
    for (const auto& c : n.channels) {
      if (!channel_ids.insert(c.channel_id).second) invalid("duplicate channel_id " + c.channel_id);
      if (!columns.insert(c.column).second) invalid("node " + n.node_id + ": duplicate column " + c.column);
    }
  }
  for (const auto& other : deployments_) {
    if (other.deployment_id == deployment.deployment_id) continue;
    for (const auto& n : other.nodes) {
      if (node_ids.count(n.node_id)) invalid("node_id " + n.node_id + " already used by " + other.deployment_id);
      for (const auto& c : n.channels) {
        if (channel_ids.count(c.channel_id)) {
          invalid("channel_id " + c.channel_id + " already used by " + other.deployment_id);
        }
      }
    }
  }
  auto it = std::find_if(deployments_.begin(), deployments_.end(),
                         [&](const Deployment& d) { return d.deployment_id == deployment.deployment_id; });
  if (it != deployments_.end()) {
    *it = std::move(deployment);
  } else {
    deployments_.push_back(std::move(deployment));
  }
  reindex();
}

const Site* Manifest::find_site(std::string_view site_id) const {
  for (const auto& s : sites_) {
    if (s.site_id == site_id) return &s;
  }
  return nullptr;
}

const Deployment* Manifest::find_deployment(std::string_view deployment_id) const {
  for (const auto& d : deployments_) {
    if (d.deployment_id == deployment_id) return &d;
  }
  return nullptr;
}

std::optional<ChannelRef> Manifest::find_channel(std::string_view channel_id) const {
  auto it = channels_.find(std::string(channel_id));
  if (it == channels_.end()) return std::nullopt;
  return it->second;
}

ChannelRef Manifest::channel(std::string_view channel_id) const {
  auto ref = find_channel(channel_id);
  if (!ref) throw Error(ErrorCode::kUnknownChannel, "unknown channel " + std::string(channel_id));
  return *ref;
}

std::optional<ChannelRef> Manifest::find_node(std::string_view node_id) const {
  auto it = nodes_.find(std::string(node_id));
  if (it == nodes_.end()) return std::nullopt;
  return it->second;
}

const Site& Manifest::site_of(const Deployment& d) const {
  const Site* s = find_site(d.site_id);
  if (!s) throw Error(ErrorCode::kInvalidManifest, "deployment " + d.deployment_id + " has no site");
  return *s;
}

json Manifest::to_json() const {
  json sites = json::array();
  for (const auto& s : sites_) {
    sites.push_back({{"site_id", s.site_id},
                     {"name", s.name},
                     {"latitude", s.latitude},
                     {"longitude", s.longitude},
                     {"utc_offset_standard", s.utc_offset_standard}});
  }
  json deployments = json::array();
  for (const auto& d : deployments_) {
    json nodes = json::array();
    for (const auto& n : d.nodes) {
      json channels = json::array();
      for (const auto& c : n.channels) channels.push_back(channel_to_json(c));
      nodes.push_back({{"node_id", n.node_id},
                       {"x_m", n.x_m},
                       {"y_m", n.y_m},
                       {"height_m", n.height_m},
                       {"channels", channels}});
    }
    deployments.push_back({{"deployment_id", d.deployment_id},
                           {"site_id", d.site_id},
                           {"kind", deployment_kind_name(d.kind)},
                           {"cadence_s", d.cadence_s},
                           {"nodes", nodes}});
  }
  return {{"format", "envnet-store"}, {"version", 1}, {"sites", sites}, {"deployments", deployments}};
}

Manifest Manifest::from_json(const json& j) {
  if (!j.is_object()) invalid("manifest is not an object");
  Manifest m;
  for (const auto& js : j.value("sites", json::array())) {
    Site s;
    s.site_id = field<std::string>(js, "site_id");
    s.name = js.value("name", s.site_id);
    s.latitude = field<double>(js, "latitude");
    s.longitude = field<double>(js, "longitude");
    s.utc_offset_standard = field<int>(js, "utc_offset_standard");
    m.upsert_site(std::move(s));
  }
  for (const auto& jd : j.value("deployments", json::array())) {
    Deployment d;
    d.deployment_id = field<std::string>(jd, "deployment_id");
    d.site_id = field<std::string>(jd, "site_id");
    auto kind = parse_deployment_kind(field<std::string>(jd, "kind"));
    if (!kind) invalid("deployment " + d.deployment_id + ": unknown kind");
    d.kind = *kind;
    d.cadence_s = field<std::int64_t>(jd, "cadence_s");
    for (const auto& jn : field<json>(jd, "nodes")) {
      NodeDescriptor n;
      n.node_id = field<std::string>(jn, "node_id");
      n.x_m = jn.value("x_m", 0.0);
      n.y_m = jn.value("y_m", 0.0);
      n.height_m = jn.value("height_m", 0.0);
      for (const auto& jc : field<json>(jn, "channels")) n.channels.push_back(channel_from_json(jc));
      d.nodes.push_back(std::move(n));
    }
    m.upsert_deployment(std::move(d));
  }
  return m;
}

}  // namespace envnet
