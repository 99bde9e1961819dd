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

// envnet command-line tool.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "envnet/api.hpp"
#include "envnet/error.hpp"
#include "envnet/ingest.hpp"
#include "envnet/provenance.hpp"
#include "envnet/simgen.hpp"
#include "envnet/spatial.hpp"
#include "envnet/timecal.hpp"

namespace {

using envnet::Error;
using envnet::ErrorCode;
using envnet::query::ParamMap;

struct Globals {
  std::string store = ".";
  std::string format;
  bool quiet = false;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, path + ": " + e.what());
  }
}

envnet::CivilDate date_arg(const std::string& flag, const std::string& text) {
  auto d = envnet::parse_date(text);
  if (!d) throw Error(ErrorCode::kInvalidArgument, flag + " expects YYYY-MM-DD, got " + text);
  return *d;
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << "\n"; }

// Flags shared by query and derive; each maps onto one query parameter.
struct QueryFlags {
  std::string from, to, tod, bounds, exclude, par_min, par_channel, agg;
  bool raw = false;
  std::vector<std::string> params;

  void add(CLI::App* cmd) {
    cmd->add_option("--from", from, "Start, ISO-8601 UTC or YYYY-MM-DD")->required();
    cmd->add_option("--to", to, "End (exclusive), ISO-8601 UTC or YYYY-MM-DD")->required();
    cmd->add_option("--tod", tod, "Local-standard time-of-day window, start-end in minutes or HH:MM");
    cmd->add_option("--bounds", bounds, "Value bounds, name:min:max[,name:min:max]");
    cmd->add_option("--exclude", exclude, "Flags to exclude, FLAG|FLAG or none");
    cmd->add_option("--par-min", par_min, "Keep samples whose incoming PAR exceeds this");
    cmd->add_option("--par-channel", par_channel, "PAR channel used by --par-min");
    cmd->add_option("--agg", agg, "Aggregation bin:stat, bin hour|day|month, stat mean|min|max|count|sum");
    cmd->add_flag("--raw", raw, "Report raw instead of engineering values");
    cmd->add_option("--param", params, "Extra key=value query parameter");
  }

  ParamMap to_params() const {
    ParamMap p;
    p.emplace("from", from);
    p.emplace("to", to);
    if (!tod.empty()) p.emplace("tod", tod);
    if (!bounds.empty()) p.emplace("bounds", bounds);
    if (!exclude.empty()) p.emplace("exclude", exclude);
    if (!par_min.empty()) p.emplace("par_min", par_min);
    if (!par_channel.empty()) p.emplace("par_channel", par_channel);
    if (!agg.empty()) p.emplace("agg", agg);
    if (raw) p.emplace("raw", "true");
    for (const auto& kv : params) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "--param expects key=value");
      p.emplace(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return p;
  }
};

void print_series(const Globals& g, const std::vector<envnet::query::Series>& s) {
  if (g.format == "json") {
    print_json(envnet::api::series_json(s));
  } else {
    std::cout << envnet::api::series_csv(s);
  }
}

std::vector<std::string> time_channels(const envnet::Store& store, const std::string& deployment,
                                       const std::vector<std::string>& channels, bool sunlight_only) {
  if (!channels.empty()) return channels;
  auto manifest = store.manifest();
  const auto* d = manifest.find_deployment(deployment);
  if (!d) throw Error(ErrorCode::kUnknownDeployment, "unknown deployment: " + deployment);
  std::vector<std::string> out;
  for (const auto& n : d->nodes) {
    for (const auto& c : n.channels) {
      bool light = (c.variable == envnet::Variable::kPar || c.variable == envnet::Variable::kSolar) &&
                   c.orientation == envnet::Orientation::kIncoming;
      if (!sunlight_only || light) out.push_back(c.channel_id);
    }
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "deployment " + deployment + " has no usable channels");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"envnet: environmental sensor network data engine"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--store", g.store, "Store directory")->capture_default_str();
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--quiet", g.quiet, "Suppress informational output");

  // init
  auto* init = app.add_subcommand("init", "Create a store, optionally loading a manifest");
  std::string init_manifest;
  init->add_option("--manifest", init_manifest, "Manifest JSON (sites and deployments) to merge");

  // ingest
  auto* ing = app.add_subcommand("ingest", "Ingest logger files");
  std::vector<std::string> ing_files, ing_options;
  std::string ing_deployment, ing_user = std::string(envnet::ingest::kDefaultUser);
  ing->add_option("files", ing_files, "Files to ingest")->required();
  ing->add_option("--deployment", ing_deployment, "Deployment id (otherwise inferred)");
  ing->add_option("--user", ing_user, "User recorded in provenance");
  ing->add_option("--option", ing_options, "key=value recorded in provenance");

  // simgen
  auto* sim = app.add_subcommand("simgen", "Generate synthetic deployment data");
  std::string sim_spec, sim_out;
  sim->add_option("--spec", sim_spec, "SimSpec JSON file")->required();
  sim->add_option("--out", sim_out, "Output directory")->required();

  // check-time / fix-time
  auto* check = app.add_subcommand("check-time", "Detect whole-hour timestamp offsets from sunrise");
  auto* fix = app.add_subcommand("fix-time", "Shift timestamps by whole hours");
  std::string t_deployment, t_from, t_to, t_user = std::string(envnet::ingest::kDefaultUser);
  std::vector<std::string> t_channels;
  int t_offset = 0;
  for (auto* cmd : {check, fix}) {
    auto* dep = cmd->add_option("--deployment", t_deployment, "Deployment id");
    auto* ch = cmd->add_option("--channel", t_channels, "Channel id (repeatable)");
    dep->excludes(ch);
    cmd->add_option("--from", t_from, "First local date, YYYY-MM-DD")->required();
    cmd->add_option("--to", t_to, "Last local date (exclusive), YYYY-MM-DD")->required();
  }
  fix->add_option("--offset", t_offset, "Detected offset in hours")->required();
  fix->add_option("--user", t_user, "User recorded in provenance");

  // query / derive
  auto* qry = app.add_subcommand("query", "Filter and aggregate stored data");
  QueryFlags qf;
  std::string q_channels;
  qry->add_option("--channels", q_channels, "Comma-separated channel ids")->required();
  qf.add(qry);
  auto* der = app.add_subcommand("derive", "Derived products: ndvi, evi2, fapar, lai, vpd");
  QueryFlags df;
  std::string d_product, d_nodes;
  der->add_option("product", d_product, "Product name")->required();
  der->add_option("--nodes", d_nodes, "Comma-separated node ids")->required();
  df.add(der);

  // frames
  auto* frm = app.add_subcommand("frames", "Interpolated value and reliability frames");
  std::string f_deployment, f_variable, f_from, f_to, f_out, f_power, f_cutoff;
  std::string f_step = "3600";
  frm->add_option("--deployment", f_deployment)->required();
  frm->add_option("--variable", f_variable)->required();
  frm->add_option("--from", f_from)->required();
  frm->add_option("--to", f_to)->required();
  frm->add_option("--step", f_step, "Step in seconds")->capture_default_str();
  frm->add_option("--power", f_power, "IDW exponent");
  frm->add_option("--cutoff", f_cutoff, "Cutoff radius in metres");
  frm->add_option("--out", f_out, "Export directory (frames.json plus CSV matrices)");

  // health
  auto* hl = app.add_subcommand("health", "Gap detection and node health");
  std::string h_channel, h_deployment, h_from, h_to, h_cadence;
  auto* hc = hl->add_option("--channel", h_channel, "Report gaps for one channel");
  auto* hd = hl->add_option("--deployment", h_deployment, "Summarize node health for a deployment");
  hc->excludes(hd);
  hl->add_option("--from", h_from)->required();
  hl->add_option("--to", h_to)->required();
  hl->add_option("--cadence", h_cadence, "Expected cadence in seconds (gaps only)");

  // provenance
  auto* prov = app.add_subcommand("provenance", "Show or annotate an upload's provenance");
  std::string p_upload, p_note, p_user = std::string(envnet::ingest::kDefaultUser);
  prov->add_option("upload_id", p_upload)->required();
  prov->add_option("--note", p_note, "Append a dated note");
  prov->add_option("--user", p_user, "User recorded with the note");

  // serve
  auto* srv = app.add_subcommand("serve", "Run the HTTP service");
  std::string s_host = "127.0.0.1";
  int s_port = 8080;
  srv->add_option("--host", s_host)->capture_default_str();
  srv->add_option("--port", s_port)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? envnet::api::kExitOk : envnet::api::kExitCaller;
  }

  auto info = [&](const std::string& msg) {
    if (!g.quiet) std::cerr << msg << "\n";
  };

  try {
    if (init->parsed()) {
      auto store = envnet::Store::open(g.store, true);
      if (!init_manifest.empty()) {
        auto incoming = envnet::Manifest::from_json(read_json(init_manifest));
        auto merged = store.manifest();
        for (const auto& s : incoming.sites()) merged.upsert_site(s);
        for (const auto& d : incoming.deployments()) merged.upsert_deployment(d);
        auto batch = store.begin_write();
        batch.set_manifest(merged);
        batch.commit();
      }
      info("store ready at " + g.store);
      return 0;
    }

    if (sim->parsed()) {
      auto spec = envnet::simgen::spec_from_json(read_json(sim_spec));
      auto out = envnet::simgen::generate(spec);
      envnet::simgen::write_output(out, sim_out);
      info("wrote " + std::to_string(out.files.size()) + " data files to " + sim_out);
      return 0;
    }

    auto store = envnet::Store::open(g.store, false);

    if (ing->parsed()) {
      int rc = 0;
      auto results = nlohmann::json::array();
      for (const auto& path : ing_files) {
        auto options = ing_options;
        if (!ing_deployment.empty()) options.push_back("deployment=" + ing_deployment);
        try {
          auto r = envnet::ingest::ingest_file(store, read_file(path), path, ing_user, options);
          auto j = envnet::api::to_json(r);
          j["file"] = path;
          results.push_back(j);
          info(path + ": " + r.upload_id + " rows_ok=" + std::to_string(r.report.rows_ok) +
               " rows_rejected=" + std::to_string(r.report.rows_rejected));
          for (const auto& w : r.report.warnings) info("  warning: " + w);
        } catch (const Error& e) {
          auto a = envnet::api::to_api_error(e);
          auto j = a.to_json();
          j["file"] = path;
          results.push_back(j);
          std::cerr << path << ": " << a.code << ": " << a.message << "\n";
          rc = std::max(rc, envnet::api::exit_code(e.code()));
        }
      }
      if (g.format == "json") print_json(results);
      return rc;
    }

    if (check->parsed() || fix->parsed()) {
      auto first = date_arg("--from", t_from), last = date_arg("--to", t_to);
      if (t_deployment.empty() && t_channels.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "give --deployment or --channel");
      }
      if (check->parsed()) {
        auto out = nlohmann::json::array();
        int rc = 0;
        for (const auto& ch : time_channels(store, t_deployment, t_channels, true)) {
          try {
            auto v = envnet::timecal::detect_utc_offset_error(store, ch, first, last);
            out.push_back({{"channel_id", ch},
                           {"offset_hours", v.offset_hours},
                           {"confidence", v.confidence},
                           {"days_used", v.days_used},
                           {"median_residual_min", v.median_residual_min},
                           {"drift_warning", v.drift_warning}});
          } catch (const Error& e) {
            auto j = envnet::api::to_api_error(e).to_json();
            j["channel_id"] = ch;
            out.push_back(j);
            rc = std::max(rc, envnet::api::exit_code(e.code()));
          }
        }
        if (g.format == "csv") {
          std::cout << "channel_id,offset_hours,confidence,days_used,median_residual_min,drift_warning\n";
          for (const auto& j : out) {
            if (!j.contains("offset_hours")) continue;
            std::cout << j["channel_id"].get<std::string>() << ',' << j["offset_hours"] << ',' << j["confidence"]
                      << ',' << j["days_used"] << ',' << j["median_residual_min"] << ','
                      << (j["drift_warning"].get<bool>() ? "true" : "false") << "\n";
          }
        } else {
          print_json(out);
        }
        return rc;
      }
      auto out = nlohmann::json::array();
      for (const auto& ch : time_channels(store, t_deployment, t_channels, false)) {
        auto n = envnet::timecal::apply_time_correction(store, ch, first, last, t_offset, t_user);
        out.push_back({{"channel_id", ch}, {"corrected", n}});
        info(ch + ": corrected " + std::to_string(n));
      }
      if (g.format == "json") print_json(out);
      return 0;
    }

    if (qry->parsed()) {
      auto p = qf.to_params();
      p.emplace("channels", q_channels);
      print_series(g, envnet::api::data_request(store, p));
      return 0;
    }

    if (der->parsed()) {
      auto p = df.to_params();
      p.emplace("nodes", d_nodes);
      print_series(g, envnet::api::derived_request(store, d_product, p));
      return 0;
    }

    if (frm->parsed()) {
      ParamMap p{{"deployment", f_deployment}, {"variable", f_variable}, {"from", f_from},
                 {"to", f_to},                 {"step_s", f_step}};
      if (!f_power.empty()) p.emplace("power", f_power);
      if (!f_cutoff.empty()) p.emplace("cutoff_m", f_cutoff);
      auto seq = envnet::api::frames_request(store, p);
      if (!f_out.empty()) {
        envnet::spatial::export_frames(seq, f_out);
        info("wrote " + std::to_string(seq.frames.size()) + " frames to " + f_out);
      } else {
        print_json(envnet::spatial::to_json(seq));
      }
      return 0;
    }

    if (hl->parsed()) {
      if (!h_channel.empty()) {
        ParamMap p{{"channel", h_channel}, {"from", h_from}, {"to", h_to}};
        if (!h_cadence.empty()) p.emplace("cadence_s", h_cadence);
        auto r = envnet::api::gaps_request(store, p);
        if (g.format == "csv") {
          std::cout << "start_utc,end_utc,missing_count\n";
          for (const auto& gap : r.gaps) {
            std::cout << envnet::format_iso_utc(gap.start) << ',' << envnet::format_iso_utc(gap.end) << ','
                      << gap.missing_count << "\n";
          }
        } else {
          print_json(envnet::health::to_json(r));
        }
        return 0;
      }
      if (h_deployment.empty()) throw Error(ErrorCode::kInvalidArgument, "give --channel or --deployment");
      auto nodes = envnet::api::nodes_request(store, {{"deployment", h_deployment}, {"from", h_from}, {"to", h_to}});
      if (g.format == "csv") {
        std::cout << "node_id,uptime_fraction,reject_rate,flags_rate,deployment_suspect\n";
        for (const auto& n : nodes) {
          std::cout << n.node_id << ',' << n.uptime_fraction << ',' << n.reject_rate << ',' << n.flags_rate << ','
                    << (n.deployment_suspect ? "true" : "false") << "\n";
        }
      } else {
        auto out = nlohmann::json::array();
        for (const auto& n : nodes) out.push_back(envnet::health::to_json(n));
        print_json(out);
      }
      return 0;
    }

    if (prov->parsed()) {
      if (!p_note.empty()) envnet::ingest::append_note(store, p_upload, p_user, p_note);
      print_json(envnet::ingest::to_json(envnet::ingest::get_provenance(store, p_upload)));
      return 0;
    }

    if (srv->parsed()) {
      envnet::api::Server server(store, envnet::api::token_from_env());
      int port = server.bind(s_host, s_port);
      info("listening on http://" + s_host + ":" + std::to_string(port) + "/v1");
      server.listen();
      return 0;
    }
  } catch (const Error& e) {
    auto a = envnet::api::to_api_error(e);
    if (g.format == "json") {
      print_json(a.to_json());
    } else {
      std::cerr << "error: " << a.code << ": " << a.message << "\n";
    }
    return envnet::api::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return envnet::api::kExitStore;
  }
  return 0;
}
