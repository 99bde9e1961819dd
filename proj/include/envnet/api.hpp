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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "envnet/error.hpp"
#include "envnet/formats.hpp"
#include "envnet/health.hpp"
#include "envnet/ingest.hpp"
#include "envnet/query.hpp"
#include "envnet/spatial.hpp"
#include "envnet/store.hpp"

namespace envnet::api {

inline constexpr const char* kTokenEnv = "PHENONET_TOKEN";

// CLI exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCaller = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitStore = 3;

int http_status(ErrorCode code);
int exit_code(ErrorCode code);

struct ApiError {
  int http_status = 500;
  std::string code;
  std::string message;
  nlohmann::json detail;  // null when absent

  nlohmann::json to_json() const;
};

ApiError to_api_error(const Error& e);

// Serializers shared by the HTTP service and the CLI.
nlohmann::json to_json(const formats::ParseReport& report);
nlohmann::json to_json(const ingest::IngestResult& result);
nlohmann::json series_json(const std::vector<query::Series>& series);
// Header `channel,ts_utc,value,count`; absent values are empty.
std::string series_csv(const std::vector<query::Series>& series);
nlohmann::json deployments_json(const Manifest& manifest);
nlohmann::json channels_json(const Manifest& manifest, std::string_view deployment_id);

// Request adapters: parameter parsing plus one module call each.
// `format` is accepted and ignored by all of them.
std::vector<query::Series> data_request(const Store& store, const query::ParamMap& params);
// `nodes=a,b` selects derived:<product>:<node>; other parameters as data.
std::vector<query::Series> derived_request(const Store& store, std::string_view product,
                                           const query::ParamMap& params);
// deployment, variable, from, to, step_s; optional power, cutoff_m.
spatial::FrameSequence frames_request(const Store& store, const query::ParamMap& params);
// channel, from, to; optional cadence_s.
health::GapReport gaps_request(const Store& store, const query::ParamMap& params);
// deployment, from, to.
std::vector<health::NodeHealth> nodes_request(const Store& store, const query::ParamMap& params);

// HTTP/1.1 service over one store. Endpoints live under /v1.
class Server {
 public:
  Server(Store store, std::optional<std::string> token);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Returns the bound port; port 0 picks a free one.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::optional<std::string> token_from_env();

}  // namespace envnet::api
