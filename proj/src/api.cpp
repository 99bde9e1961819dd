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

#include "envnet/api.hpp"

#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include <httplib.h>

#include "envnet/derive.hpp"
#include "envnet/provenance.hpp"

namespace envnet::api {

namespace {

struct CodeInfo {
  int http;
  int exit;
};

CodeInfo info(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidManifest:
    case ErrorCode::kUnsortedInput:
    case ErrorCode::kInvertedRange:
    case ErrorCode::kUnknownVariable:
    case ErrorCode::kEmptySpec:
    case ErrorCode::kEmptyPoints:
    case ErrorCode::kBadParams:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnknownParameter:
      return {400, kExitCaller};
    case ErrorCode::kUnknownDialect:
    case ErrorCode::kAmbiguousDialect:
    case ErrorCode::kMalformedHeader:
      return {400, kExitData};
    case ErrorCode::kUnauthorized:
      return {401, kExitCaller};
    case ErrorCode::kUnknownChannel:
    case ErrorCode::kUnknownDeployment:
    case ErrorCode::kUnknownUpload:
      return {404, kExitCaller};
    case ErrorCode::kDuplicateUpload:
    case ErrorCode::kOverlapAfterShift:
      return {409, kExitData};
    case ErrorCode::kPolarDayNight:
    case ErrorCode::kInsufficientDays:
    case ErrorCode::kNoCalibration:
    case ErrorCode::kNightOrDegenerate:
      return {422, kExitData};
    case ErrorCode::kNotAStore:
    case ErrorCode::kCorruptManifest:
    case ErrorCode::kCorruptStore:
    case ErrorCode::kStoreWriteFailure:
    case ErrorCode::kIo:
      return {500, kExitStore};
  }
  return {500, kExitStore};
}

std::string number_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::optional<std::string> take(query::ParamMap& params, const std::string& key) {
  auto n = params.count(key);
  if (n == 0) return std::nullopt;
  if (n > 1) throw Error(ErrorCode::kInvalidArgument, "parameter " + key + " given more than once");
  auto it = params.find(key);
  auto v = it->second;
  params.erase(it);
  return v;
}

std::string require(query::ParamMap& params, const std::string& key) {
  auto v = take(params, key);
  if (!v) throw Error(ErrorCode::kInvalidArgument, "parameter " + key + " is required");
  return *v;
}

void reject_leftovers(const query::ParamMap& params) {
  for (const auto& [k, v] : params) {
    if (k != "format") throw Error(ErrorCode::kUnknownParameter, "unknown query parameter: " + k);
  }
}

Instant require_time(query::ParamMap& params, const std::string& key) {
  auto text = require(params, key);
  auto t = parse_instant_or_date(text);
  if (!t) throw Error(ErrorCode::kInvalidArgument, "parameter " + key + "=" + text + ": expected an ISO-8601 UTC time");
  return *t;
}

double number_param(const std::string& key, const std::string& text) {
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidArgument, "parameter " + key + "=" + text + ": not a number");
  }
  return v;
}

std::int64_t integer_param(const std::string& key, const std::string& text) {
  double v = number_param(key, text);
  if (v != std::floor(v)) throw Error(ErrorCode::kInvalidArgument, "parameter " + key + " must be an integer");
  return static_cast<std::int64_t>(v);
}

}  // namespace

int http_status(ErrorCode code) { return info(code).http; }
int exit_code(ErrorCode code) { return info(code).exit; }

nlohmann::json ApiError::to_json() const { return {{"code", code}, {"message", message}, {"detail", detail}}; }

ApiError to_api_error(const Error& e) {
  ApiError a;
  a.http_status = http_status(e.code());
  a.code = std::string(error_code_name(e.code()));
  a.message = e.what();
  if (e.code() == ErrorCode::kDuplicateUpload) {
    a.detail = {{"upload_id", e.detail()}};
  } else if (!e.detail().empty()) {
    a.detail = e.detail();
  }
  return a;
}

nlohmann::json to_json(const formats::ParseReport& report) {
  auto errors = nlohmann::json::array();
  for (const auto& e : report.errors) {
    errors.push_back({{"line", e.line_number},
                      {"kind", std::string(formats::row_error_name(e.kind))},
                      {"excerpt", e.excerpt},
                      {"node_id", e.node_id}});
  }
  auto map = nlohmann::json::array();
  for (const auto& m : report.channel_map) map.push_back({{"column", m.column}, {"channel_ids", m.channel_ids}});
  return {{"dialect", std::string(formats::dialect_name(report.dialect.kind))},
          {"dialect_version", report.dialect.version},
          {"rows_ok", report.rows_ok},
          {"rows_rejected", report.rows_rejected},
          {"errors", errors},
          {"channel_map", map},
          {"unmapped_columns", report.unmapped_columns},
          {"warnings", report.warnings}};
}

nlohmann::json to_json(const ingest::IngestResult& result) {
  return {{"upload_id", result.upload_id},
          {"records_written", result.records_written},
          {"duplicates", result.duplicates},
          {"report", to_json(result.report)}};
}

nlohmann::json series_json(const std::vector<query::Series>& series) {
  auto out = nlohmann::json::array();
  for (const auto& s : series) {
    auto points = nlohmann::json::array();
    for (const auto& p : s.points) {
      points.push_back({{"ts", format_iso_utc(p.ts)},
                        {"value", p.value ? nlohmann::json(*p.value) : nlohmann::json(nullptr)},
                        {"count", p.count}});
    }
    out.push_back({{"channel_id", s.channel_id}, {"points", points}});
  }
  return {{"series", out}};
}

std::string series_csv(const std::vector<query::Series>& series) {
  std::string out = "channel,ts_utc,value,count\n";
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      out += s.channel_id;
      out += ',';
      out += format_iso_utc(p.ts);
      out += ',';
      if (p.value) out += number_text(*p.value);
      out += ',';
      out += std::to_string(p.count);
      out += '\n';
    }
  }
  return out;
}

nlohmann::json deployments_json(const Manifest& manifest) {
  auto out = nlohmann::json::array();
  for (const auto& d : manifest.deployments()) {
    std::size_t channels = 0;
    for (const auto& n : d.nodes) channels += n.channels.size();
    out.push_back({{"deployment_id", d.deployment_id},
                   {"site_id", d.site_id},
                   {"kind", std::string(deployment_kind_name(d.kind))},
                   {"cadence_s", d.cadence_s},
                   {"nodes", d.nodes.size()},
                   {"channels", channels}});
  }
  return out;
}

nlohmann::json channels_json(const Manifest& manifest, std::string_view deployment_id) {
  const auto* d = manifest.find_deployment(deployment_id);
  if (!d) throw Error(ErrorCode::kUnknownDeployment, "unknown deployment: " + std::string(deployment_id));
  auto out = nlohmann::json::array();
  for (const auto& n : d->nodes) {
    for (const auto& c : n.channels) {
      out.push_back({{"channel_id", c.channel_id},
                     {"node_id", n.node_id},
                     {"column", c.column},
                     {"variable", std::string(variable_name(c.variable))},
                     {"orientation", std::string(orientation_name(c.orientation))},
                     {"valid_min", c.valid_min},
                     {"valid_max", c.valid_max},
                     {"raw_unit", c.raw_unit},
                     {"x_m", n.x_m},
                     {"y_m", n.y_m},
                     {"height_m", n.height_m}});
    }
  }
  return out;
}

std::vector<query::Series> data_request(const Store& store, const query::ParamMap& params) {
  return query::run_query(store, query::parse_query_params(params, {"format"}));
}

std::vector<query::Series> derived_request(const Store& store, std::string_view product,
                                           const query::ParamMap& params) {
  auto p = derive::parse_product(product);
  if (!p) throw Error(ErrorCode::kInvalidArgument, "unknown derived product: " + std::string(product));
  query::ParamMap rest = params;
  if (rest.count("channels")) throw Error(ErrorCode::kUnknownParameter, "use nodes=, not channels=, for derived data");
  auto nodes = require(rest, "nodes");
  std::string channels;
  std::size_t start = 0;
  while (start <= nodes.size()) {
    auto comma = nodes.find(',', start);
    auto node = nodes.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (node.empty()) throw Error(ErrorCode::kInvalidArgument, "empty node id in nodes=" + nodes);
    if (!channels.empty()) channels += ',';
    channels += derive::DerivedChannel{*p, node}.id();
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  rest.emplace("channels", channels);
  return data_request(store, rest);
}

spatial::FrameSequence frames_request(const Store& store, const query::ParamMap& params) {
  auto rest = params;
  auto deployment = require(rest, "deployment");
  auto variable_text = require(rest, "variable");
  auto variable = parse_variable(variable_text);
  if (!variable) throw Error(ErrorCode::kUnknownVariable, "unknown variable: " + variable_text);
  auto from = require_time(rest, "from");
  auto to = require_time(rest, "to");
  spatial::FrameOptions options;
  options.step_s = integer_param("step_s", require(rest, "step_s"));
  if (auto v = take(rest, "power")) options.power = number_param("power", *v);
  if (auto v = take(rest, "cutoff_m")) options.cutoff_m = number_param("cutoff_m", *v);
  reject_leftovers(rest);
  if (to < from) throw Error(ErrorCode::kInvertedRange, "frame range is inverted");
  return spatial::frame_sequence(store, deployment, *variable, from, to, options);
}

health::GapReport gaps_request(const Store& store, const query::ParamMap& params) {
  auto rest = params;
  auto channel = require(rest, "channel");
  auto from = require_time(rest, "from");
  auto to = require_time(rest, "to");
  auto cadence = take(rest, "cadence_s");
  reject_leftovers(rest);
  if (to < from) throw Error(ErrorCode::kInvertedRange, "gap range is inverted");
  if (cadence) return health::detect_gaps(store, channel, from, to, integer_param("cadence_s", *cadence));
  return health::detect_gaps(store, channel, from, to);
}

std::vector<health::NodeHealth> nodes_request(const Store& store, const query::ParamMap& params) {
  auto rest = params;
  auto deployment = require(rest, "deployment");
  auto from = require_time(rest, "from");
  auto to = require_time(rest, "to");
  reject_leftovers(rest);
  if (to < from) throw Error(ErrorCode::kInvertedRange, "health window is inverted");
  return health::node_health_summary(store, deployment, from, to);
}

std::optional<std::string> token_from_env() {
  const char* v = std::getenv(kTokenEnv);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

struct Server::Impl {
  Store store;
  std::optional<std::string> token;
  httplib::Server http;

  Impl(Store s, std::optional<std::string> t) : store(std::move(s)), token(std::move(t)) {}

  static query::ParamMap params_of(const httplib::Request& req) {
    query::ParamMap p;
    for (const auto& [k, v] : req.params) p.emplace(k, v);
    return p;
  }

  static bool wants_csv(const httplib::Request& req) {
    auto f = req.get_param_value("format");
    if (f == "csv") return true;
    if (f == "json") return false;
    if (!f.empty()) throw Error(ErrorCode::kInvalidArgument, "format must be csv or json");
    return req.get_header_value("Accept").find("text/csv") != std::string::npos;
  }

  static void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump() + "\n", "application/json");
  }

  static void send_error(httplib::Response& res, const Error& e) {
    auto a = to_api_error(e);
    send_json(res, a.http_status, a.to_json());
  }

  template <typename F>
  httplib::Server::Handler wrap(F&& f) {
    return [this, f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
      try {
        if (token && req.get_header_value("Authorization") != "Bearer " + *token) {
          throw Error(ErrorCode::kUnauthorized, "missing or wrong bearer token");
        }
        f(req, res);
      } catch (const Error& e) {
        send_error(res, e);
      } catch (const std::exception& e) {
        send_error(res, Error(ErrorCode::kIo, e.what()));
      }
    };
  }

  static void no_params(const httplib::Request& req) {
    for (const auto& [k, v] : req.params) {
      if (k != "format") throw Error(ErrorCode::kUnknownParameter, "unknown query parameter: " + k);
    }
  }

  void send_series(const httplib::Request& req, httplib::Response& res, const std::vector<query::Series>& s) {
    if (wants_csv(req)) {
      res.status = 200;
      res.set_content(series_csv(s), "text/csv");
    } else {
      send_json(res, 200, series_json(s));
    }
  }

  void routes() {
    http.Post("/v1/uploads", wrap([this](const httplib::Request& req, httplib::Response& res) {
      no_params(req);
      if (!req.is_multipart_form_data() || !req.has_file("file")) {
        throw Error(ErrorCode::kInvalidArgument, "multipart field 'file' is required");
      }
      static const std::set<std::string> kFields = {"file", "site", "deployment", "user", "options"};
      for (const auto& [name, part] : req.files) {
        if (!kFields.count(name)) throw Error(ErrorCode::kUnknownParameter, "unknown form field: " + name);
      }
      auto field = [&](const char* name) -> std::string {
        return req.has_file(name) ? req.get_file_value(name).content : std::string();
      };
      auto file = req.get_file_value("file");
      std::vector<std::string> options;
      std::istringstream opt_lines(field("options"));
      for (std::string line; std::getline(opt_lines, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) options.push_back(line);
      }
      if (auto d = field("deployment"); !d.empty()) {
        auto manifest = store.manifest();
        const auto* dep = manifest.find_deployment(d);
        if (!dep) throw Error(ErrorCode::kUnknownDeployment, "unknown deployment: " + d);
        if (auto s = field("site"); !s.empty() && s != dep->site_id) {
          throw Error(ErrorCode::kInvalidArgument, "deployment " + d + " is not at site " + s);
        }
        options.push_back("deployment=" + d);
      }
      auto user = field("user");
      auto result = ingest::ingest_file(store, file.content, file.filename.empty() ? "upload" : file.filename,
                                        user.empty() ? ingest::kDefaultUser : std::string_view(user), options);
      send_json(res, 201, to_json(result));
    }));

    http.Get("/v1/deployments", wrap([this](const httplib::Request& req, httplib::Response& res) {
      no_params(req);
      send_json(res, 200, deployments_json(store.manifest()));
    }));

    http.Get(R"(/v1/deployments/([^/]+)/channels)", wrap([this](const httplib::Request& req, httplib::Response& res) {
      no_params(req);
      send_json(res, 200, channels_json(store.manifest(), req.matches[1].str()));
    }));

    http.Get("/v1/data", wrap([this](const httplib::Request& req, httplib::Response& res) {
      send_series(req, res, data_request(store, params_of(req)));
    }));

    http.Get(R"(/v1/derived/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
      send_series(req, res, derived_request(store, req.matches[1].str(), params_of(req)));
    }));

    http.Get("/v1/spatial/frames", wrap([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, spatial::to_json(frames_request(store, params_of(req))));
    }));

    http.Get("/v1/health/gaps", wrap([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, health::to_json(gaps_request(store, params_of(req))));
    }));

    http.Get("/v1/health/nodes", wrap([this](const httplib::Request& req, httplib::Response& res) {
      auto nodes = nlohmann::json::array();
      for (const auto& n : nodes_request(store, params_of(req))) nodes.push_back(health::to_json(n));
      send_json(res, 200, nodes);
    }));

    http.Get(R"(/v1/provenance/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
      no_params(req);
      send_json(res, 200, ingest::to_json(ingest::get_provenance(store, req.matches[1].str())));
    }));

    http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.status == 404 && res.body.empty()) {
        ApiError a{404, "NOT_FOUND", "no such endpoint", nullptr};
        res.set_content(a.to_json().dump() + "\n", "application/json");
      }
    });
  }
};

Server::Server(Store store, std::optional<std::string> token)
    : impl_(std::make_unique<Impl>(std::move(store), std::move(token))) {
  impl_->routes();
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_) impl_->http.stop();
}

}  // namespace envnet::api
