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

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "envnet/types.hpp"

namespace envnet {

// Resolved location of a channel inside the manifest. Pointers borrow from
// the Manifest that produced them.
struct ChannelRef {
  const Site* site = nullptr;
  const Deployment* deployment = nullptr;
  const NodeDescriptor* node = nullptr;
  const ChannelDescriptor* channel = nullptr;
};

class Manifest {
 public:
  Manifest() = default;
  Manifest(const Manifest& other) : sites_(other.sites_), deployments_(other.deployments_) { reindex(); }
  Manifest& operator=(const Manifest& other) {
    sites_ = other.sites_;
    deployments_ = other.deployments_;
    reindex();
    return *this;
  }
  Manifest(Manifest&&) = default;
  Manifest& operator=(Manifest&&) = default;

  const std::vector<Site>& sites() const { return sites_; }
  const std::vector<Deployment>& deployments() const { return deployments_; }

  // Insert or replace by id; validates and rejects channel/node id clashes
  // with other deployments.
  void upsert_site(Site site);
  void upsert_deployment(Deployment deployment);

  const Site* find_site(std::string_view site_id) const;
  const Deployment* find_deployment(std::string_view deployment_id) const;
  // Throws kUnknownChannel.
  ChannelRef channel(std::string_view channel_id) const;
  std::optional<ChannelRef> find_channel(std::string_view channel_id) const;
  std::optional<ChannelRef> find_node(std::string_view node_id) const;
  const Site& site_of(const Deployment& d) const;

  nlohmann::json to_json() const;
  // Throws Error(kInvalidManifest) on schema violations.
  static Manifest from_json(const nlohmann::json& j);

  bool operator==(const Manifest& other) const {
    return sites_ == other.sites_ && deployments_ == other.deployments_;
  }

 private:
  void reindex();

  std::vector<Site> sites_;
  std::vector<Deployment> deployments_;
  std::unordered_map<std::string, ChannelRef> channels_;
  std::unordered_map<std::string, ChannelRef> nodes_;
};

}  // namespace envnet
