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

#include "envnet/query.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "envnet/derive.hpp"
#include "envnet/error.hpp"

namespace envnet::query {

namespace {

using std::chrono::days;
using std::chrono::hours;

struct Resolved {
  std::string id;
  std::string bound_key;
  int utc_offset_min = 0;
  const Deployment* deployment = nullptr;
  std::optional<derive::DerivedChannel> derived;
};

Resolved resolve(const Manifest& manifest, const std::string& id) {
  Resolved r;
  r.id = id;
  if (auto d = derive::parse_derived_channel(id)) {
    auto ref = derive::derived_context(manifest, *d);
    r.bound_key = std::string(derive::product_name(d->product));
    r.utc_offset_min = ref.site->utc_offset_standard;
    r.deployment = ref.deployment;
    r.derived = d;
    return r;
  }
  auto ref = manifest.channel(id);
  r.bound_key = std::string(variable_name(ref.channel->variable));
  r.utc_offset_min = ref.site->utc_offset_standard;
  r.deployment = ref.deployment;
  return r;
}

class ParGate {
 public:
  ParGate(std::vector<std::pair<std::int64_t, double>> samples, std::int64_t cadence_s, double threshold)
      : samples_(std::move(samples)), cadence_s_(cadence_s), threshold_(threshold) {}

  bool passes(Instant ts) const {
    std::int64_t t = to_epoch(ts);
    auto it = std::lower_bound(samples_.begin(), samples_.end(), t,
                               [](const auto& s, std::int64_t v) { return s.first < v; });
    if (it != samples_.end() && it->first == t) return it->second > threshold_;
    const std::pair<std::int64_t, double>* best = nullptr;
    std::int64_t best_d = std::numeric_limits<std::int64_t>::max();
    if (it != samples_.begin()) {
      auto p = std::prev(it);
      best = &*p;
      best_d = t - p->first;
    }
    if (it != samples_.end() && it->first - t < best_d) {
      best = &*it;
      best_d = it->first - t;
    }
    if (!best || 2 * best_d >= cadence_s_) return false;
    return best->second > threshold_;
  }

 private:
  std::vector<std::pair<std::int64_t, double>> samples_;
  std::int64_t cadence_s_;
  double threshold_;
};

ParGate make_gate(const Store& store, const Manifest& manifest, const QuerySpec& spec, const Resolved& r) {
  const ChannelDescriptor* gate = nullptr;
  const Deployment* gate_dep = nullptr;
  if (spec.par_channel) {
    auto ref = manifest.channel(*spec.par_channel);
    gate = ref.channel;
    gate_dep = ref.deployment;
  } else {
    for (const auto& n : r.deployment->nodes) {
      for (const auto& c : n.channels) {
        if (c.variable == Variable::kPar && c.orientation == Orientation::kIncoming) {
          gate = &c;
          break;
        }
      }
      if (gate) break;
    }
    gate_dep = r.deployment;
    if (!gate) {
      throw Error(ErrorCode::kInvalidArgument,
                  "clear-sky filter needs an incoming PAR channel in deployment " + r.deployment->deployment_id);
    }
  }
  std::int64_t cadence = gate_dep->cadence_s;
  auto records = store.read_records(gate->channel_id, spec.from - std::chrono::seconds{cadence},
                                    spec.to + std::chrono::seconds{cadence});
  std::vector<std::pair<std::int64_t, double>> samples;
  samples.reserve(records.size());
  for (const auto& rec : records) {
    if (!rec.eng_value || rec.flags.intersects(spec.exclude_flagged)) continue;
    samples.emplace_back(to_epoch(rec.ts_utc), *rec.eng_value);
  }
  return ParGate(std::move(samples), cadence, *spec.clear_sky_par_min);
}

struct Accumulator {
  std::size_t count = 0;
  double sum = 0.0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();

  void add(double v) {
    ++count;
    sum += v;
    min = std::min(min, v);
    max = std::max(max, v);
  }

  std::optional<double> value(Stat s) const {
    if (count == 0) return std::nullopt;
    switch (s) {
      case Stat::kMean: return sum / static_cast<double>(count);
      case Stat::kMin: return min;
      case Stat::kMax: return max;
      case Stat::kCount: return static_cast<double>(count);
      case Stat::kSum: return sum;
    }
    return std::nullopt;
  }
};

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
  throw Error(ErrorCode::kInvalidArgument, "parameter " + key + "=" + value + ": " + why);
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v)) {
    bad(key, text, "not a number");
  }
  return v;
}

// Minutes of day as an integer, or HH:MM.
int parse_clock(const std::string& key, const std::string& text) {
  int minutes = 0;
  if (text.find(':') == std::string::npos) {
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), minutes);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) bad(key, text, "expected minutes or HH:MM");
  } else {
    int h = 0, m = 0;
    if (text.size() != 5 || text[2] != ':' || std::sscanf(text.c_str(), "%2d:%2d", &h, &m) != 2 || m < 0 || m > 59) {
      bad(key, text, "expected minutes or HH:MM");
    }
    minutes = h * 60 + m;
  }
  if (minutes < 0 || minutes > 1440) bad(key, text, "minute of day out of range");
  return minutes;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Shortest form that round-trips.
  for (int p = 1; p <= 17; ++p) {
    char tmp[64];
    std::snprintf(tmp, sizeof tmp, "%.*g", p, v);
    if (std::strtod(tmp, nullptr) == v) return tmp;
  }
  return buf;
}

const std::set<std::string>& vocabulary() {
  static const std::set<std::string> keys = {"channels", "from",        "to",  "tod", "bounds",
                                             "exclude",  "par_min",     "par_channel", "agg", "raw"};
  return keys;
}

}  // namespace

std::string_view bin_name(BinSize b) {
  switch (b) {
    case BinSize::kHour: return "hour";
    case BinSize::kDay: return "day";
    case BinSize::kMonth: return "month";
  }
  return "day";
}

std::string_view stat_name(Stat s) {
  switch (s) {
    case Stat::kMean: return "mean";
    case Stat::kMin: return "min";
    case Stat::kMax: return "max";
    case Stat::kCount: return "count";
    case Stat::kSum: return "sum";
  }
  return "mean";
}

bool TodWindow::contains(int m) const {
  if (start_min <= end_min) return m >= start_min && m < end_min;
  return m >= start_min || m < end_min;
}

FlagSet default_exclusions() { return {QualityFlag::kOutOfRange, QualityFlag::kMissing, QualityFlag::kDuplicate}; }

Instant bin_start(Instant ts, BinSize bin, int utc_offset_min) {
  auto local = to_local(ts, utc_offset_min);
  switch (bin) {
    case BinSize::kHour: return to_utc(std::chrono::floor<hours>(local), utc_offset_min);
    case BinSize::kDay: return to_utc(std::chrono::floor<days>(local), utc_offset_min);
    case BinSize::kMonth: {
      std::chrono::year_month_day ymd{std::chrono::floor<days>(local)};
      auto first = std::chrono::local_days{ymd.year() / ymd.month() / 1};
      return to_utc(first, utc_offset_min);
    }
  }
  return ts;
}

Instant next_bin(Instant start, BinSize bin, int utc_offset_min) {
  switch (bin) {
    case BinSize::kHour: return start + hours{1};
    case BinSize::kDay: return start + days{1};
    case BinSize::kMonth: {
      auto local = to_local(start, utc_offset_min);
      std::chrono::year_month_day ymd{std::chrono::floor<days>(local)};
      auto ym = ymd.year() / ymd.month() + std::chrono::months{1};
      return to_utc(std::chrono::local_days{ym / 1}, utc_offset_min);
    }
  }
  return start;
}

std::vector<Series> run_query(const Store& store, const QuerySpec& spec) {
  if (spec.to < spec.from) throw Error(ErrorCode::kInvertedRange, "query range is inverted");
  if (spec.channels.empty()) throw Error(ErrorCode::kEmptySpec, "no channels requested");
  auto manifest = store.manifest();

  std::vector<std::string> ids = spec.channels;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  std::vector<Resolved> resolved;
  resolved.reserve(ids.size());
  for (const auto& id : ids) resolved.push_back(resolve(manifest, id));

  std::vector<Series> out;
  for (const auto& r : resolved) {
    auto records = r.derived ? derive::derived_records(store, manifest, *r.derived, spec.from, spec.to)
                             : store.read_records(r.id, spec.from, spec.to);
    std::optional<ParGate> gate;
    if (spec.clear_sky_par_min) gate.emplace(make_gate(store, manifest, spec, r));
    const ValueBounds* bounds = nullptr;
    if (auto it = spec.value_bounds.find(r.bound_key); it != spec.value_bounds.end()) bounds = &it->second;

    Series s;
    s.channel_id = r.id;
    std::vector<std::pair<Instant, double>> kept;
    kept.reserve(records.size());
    for (const auto& rec : records) {
      auto value = spec.raw_values ? rec.raw_value : rec.eng_value;
      if (!value) continue;
      if (rec.flags.intersects(spec.exclude_flagged)) continue;
      if (spec.tod_window && !spec.tod_window->contains(local_minute_of_day(rec.ts_utc, r.utc_offset_min))) continue;
      if (bounds && (*value < bounds->min || *value > bounds->max)) continue;
      if (gate && !gate->passes(rec.ts_utc)) continue;
      kept.emplace_back(rec.ts_utc, *value);
    }

    if (!spec.agg) {
      s.points.reserve(kept.size());
      for (const auto& [ts, v] : kept) s.points.push_back({ts, v, 1});
    } else if (spec.from < spec.to) {
      auto bin = spec.agg->bin;
      auto last = bin_start(spec.to - std::chrono::seconds{1}, bin, r.utc_offset_min);
      std::size_t k = 0;
      for (auto b = bin_start(spec.from, bin, r.utc_offset_min); b <= last; b = next_bin(b, bin, r.utc_offset_min)) {
        auto end = next_bin(b, bin, r.utc_offset_min);
        Accumulator acc;
        while (k < kept.size() && kept[k].first < end) acc.add(kept[k++].second);
        s.points.push_back({b, acc.value(spec.agg->stat), acc.count});
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

QuerySpec parse_query_params(const ParamMap& params, const std::set<std::string>& also_allowed) {
  QuerySpec spec;
  spec.channels.clear();
  bool have_from = false, have_to = false;
  std::set<std::string> seen;
  for (const auto& [key, value] : params) {
    if (!vocabulary().count(key)) {
      if (also_allowed.count(key)) continue;
      throw Error(ErrorCode::kUnknownParameter, "unknown query parameter: " + key);
    }
    if (key != "channels" && key != "bounds" && !seen.insert(key).second) bad(key, value, "given more than once");

    if (key == "channels") {
      for (auto& c : split(value, ',')) {
        if (c.empty()) bad(key, value, "empty channel id");
        spec.channels.push_back(c);
      }
    } else if (key == "from" || key == "to") {
      auto t = parse_instant_or_date(value);
      if (!t) bad(key, value, "expected YYYY-MM-DD or YYYY-MM-DDThh:mm:ssZ");
      (key == "from" ? spec.from : spec.to) = *t;
      (key == "from" ? have_from : have_to) = true;
    } else if (key == "tod") {
      auto parts = split(value, '-');
      if (parts.size() != 2) bad(key, value, "expected start-end in local minutes");
      spec.tod_window = TodWindow{parse_clock(key, parts[0]), parse_clock(key, parts[1])};
      if (spec.tod_window->start_min == 1440) spec.tod_window->start_min = 0;
    } else if (key == "bounds") {
      for (auto& item : split(value, ',')) {
        auto parts = split(item, ':');
        if (parts.size() != 3 || parts[0].empty()) bad(key, value, "expected name:min:max");
        ValueBounds b{parse_number(key, parts[1]), parse_number(key, parts[2])};
        if (b.min > b.max) bad(key, value, "min exceeds max");
        if (!parse_variable(parts[0]) && !derive::parse_product(parts[0])) bad(key, value, "unknown variable");
        spec.value_bounds[parts[0]] = b;
      }
    } else if (key == "exclude") {
      if (value == "none") {
        spec.exclude_flagged = FlagSet{};
      } else {
        auto f = FlagSet::parse(value);
        if (!f) bad(key, value, "expected FLAG|FLAG or none");
        spec.exclude_flagged = *f;
      }
    } else if (key == "par_min") {
      spec.clear_sky_par_min = parse_number(key, value);
    } else if (key == "par_channel") {
      if (value.empty()) bad(key, value, "empty channel id");
      spec.par_channel = value;
    } else if (key == "agg") {
      auto parts = split(value, ':');
      if (parts.size() != 2) bad(key, value, "expected bin:stat");
      Aggregation a;
      if (parts[0] == "hour") a.bin = BinSize::kHour;
      else if (parts[0] == "day") a.bin = BinSize::kDay;
      else if (parts[0] == "month") a.bin = BinSize::kMonth;
      else bad(key, value, "bin must be hour, day or month");
      bool ok = false;
      for (auto s : {Stat::kMean, Stat::kMin, Stat::kMax, Stat::kCount, Stat::kSum}) {
        if (stat_name(s) == parts[1]) {
          a.stat = s;
          ok = true;
        }
      }
      if (!ok) bad(key, value, "stat must be mean, min, max, count or sum");
      spec.agg = a;
    } else if (key == "raw") {
      if (value == "true" || value == "1") spec.raw_values = true;
      else if (value == "false" || value == "0") spec.raw_values = false;
      else bad(key, value, "expected true or false");
    }
  }
  if (spec.channels.empty()) throw Error(ErrorCode::kEmptySpec, "parameter channels is required");
  if (!have_from || !have_to) throw Error(ErrorCode::kInvalidArgument, "parameters from and to are required");
  if (spec.to < spec.from) throw Error(ErrorCode::kInvertedRange, "query range is inverted");
  return spec;
}

ParamMap to_query_params(const QuerySpec& spec) {
  ParamMap p;
  std::string channels;
  for (const auto& c : spec.channels) channels += (channels.empty() ? "" : ",") + c;
  p.emplace("channels", channels);
  p.emplace("from", format_iso_utc(spec.from));
  p.emplace("to", format_iso_utc(spec.to));
  if (spec.tod_window) {
    p.emplace("tod", std::to_string(spec.tod_window->start_min) + "-" + std::to_string(spec.tod_window->end_min));
  }
  if (!spec.value_bounds.empty()) {
    std::string b;
    for (const auto& [k, v] : spec.value_bounds) {
      b += (b.empty() ? "" : ",") + k + ":" + format_number(v.min) + ":" + format_number(v.max);
    }
    p.emplace("bounds", b);
  }
  if (spec.exclude_flagged != default_exclusions()) {
    p.emplace("exclude", spec.exclude_flagged.empty() ? "none" : spec.exclude_flagged.to_string());
  }
  if (spec.clear_sky_par_min) p.emplace("par_min", format_number(*spec.clear_sky_par_min));
  if (spec.par_channel) p.emplace("par_channel", *spec.par_channel);
  if (spec.agg) p.emplace("agg", std::string(bin_name(spec.agg->bin)) + ":" + std::string(stat_name(spec.agg->stat)));
  if (spec.raw_values) p.emplace("raw", "true");
  return p;
}

std::string encode_query_string(const ParamMap& params) {
  static const char* kHex = "0123456789ABCDEF";
  std::string out;
  auto encode = [&](std::string_view s) {
    for (unsigned char c : s) {
      if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~' || c == ',' || c == ':') {
        out += static_cast<char>(c);
      } else {
        out += '%';
        out += kHex[c >> 4];
        out += kHex[c & 15];
      }
    }
  };
  for (const auto& [k, v] : params) {
    if (!out.empty()) out += '&';
    encode(k);
    out += '=';
    encode(v);
  }
  return out;
}

}  // namespace envnet::query
