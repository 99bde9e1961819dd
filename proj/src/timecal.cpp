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

#include "envnet/timecal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "envnet/error.hpp"
#include "envnet/provenance.hpp"

namespace envnet::timecal {

namespace {

constexpr double kPi = std::numbers::pi;

double deg2rad(double d) { return d * kPi / 180.0; }
double rad2deg(double r) { return r * 180.0 / kPi; }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::pair<Instant, Instant> local_window(const Site& site, CivilDate first, CivilDate last) {
  return {local_midnight(first, site.utc_offset_standard), local_midnight(last, site.utc_offset_standard)};
}

}  // namespace

double solar_declination(int day_of_year) {
  return deg2rad(23.44) * std::sin(2.0 * kPi * (284.0 + day_of_year) / 365.0);
}

double equation_of_time(int day_of_year) {
  double b = 2.0 * kPi * (day_of_year - 1) / 365.0;
  return 229.18 * (0.000075 + 0.001868 * std::cos(b) - 0.032077 * std::sin(b) - 0.014615 * std::cos(2 * b) -
                   0.040849 * std::sin(2 * b));
}

double expected_sunrise(double latitude, double longitude, int utc_offset_standard, CivilDate date) {
  int n = day_of_year(date);
  double phi = deg2rad(latitude);
  double decl = solar_declination(n);
  double cos_h = (std::cos(deg2rad(kSunriseZenithDeg)) - std::sin(phi) * std::sin(decl)) /
                 (std::cos(phi) * std::cos(decl));
  if (!(cos_h >= -1.0 && cos_h <= 1.0)) {
    throw Error(ErrorCode::kPolarDayNight, "no sunrise on " + format_date(date) + " at latitude " +
                                               std::to_string(latitude));
  }
  double hour_angle_deg = rad2deg(std::acos(cos_h));
  double solar_noon = 720.0 - 4.0 * longitude - equation_of_time(n) + utc_offset_standard;
  double sunrise = solar_noon - 4.0 * hour_angle_deg;
  return std::fmod(std::fmod(sunrise, 1440.0) + 1440.0, 1440.0);
}

double cos_solar_zenith(double latitude, double longitude, int utc_offset_standard, Instant utc) {
  CivilDate date = local_date(utc, utc_offset_standard);
  int n = day_of_year(date);
  auto local = to_local(utc, utc_offset_standard);
  double clock_min =
      std::chrono::duration<double, std::ratio<60>>(local - std::chrono::floor<std::chrono::days>(local)).count();
  double solar_min = clock_min + equation_of_time(n) + 4.0 * longitude - utc_offset_standard;
  double hour_angle = deg2rad(solar_min / 4.0 - 180.0);
  double phi = deg2rad(latitude);
  double decl = solar_declination(n);
  return std::sin(phi) * std::sin(decl) + std::cos(phi) * std::cos(decl) * std::cos(hour_angle);
}

std::optional<double> observed_sunrise(std::span<const SensorRecord> day, int utc_offset_standard,
                                       const SunriseOptions& options) {
  if (!(options.threshold > 0.0) || options.sustain < 1) {
    throw Error(ErrorCode::kInvalidArgument, "threshold must be > 0 and sustain >= 1");
  }
  std::vector<const SensorRecord*> valued;
  valued.reserve(day.size());
  for (const auto& r : day) {
    if (r.eng_value) valued.push_back(&r);
  }
  const auto sustain = static_cast<std::size_t>(options.sustain);
  for (std::size_t i = 0; i + sustain <= valued.size(); ++i) {
    bool run = true;
    for (std::size_t k = 0; k < sustain && run; ++k) run = *valued[i + k]->eng_value >= options.threshold;
    if (run) {
      auto local = to_local(valued[i]->ts_utc, utc_offset_standard);
      double minutes =
          std::chrono::duration<double, std::ratio<60>>(local - std::chrono::floor<std::chrono::days>(local)).count();
      if (options.interpolate && i > 0) {
        const auto& prev = *valued[i - 1];
        const auto& cur = *valued[i];
        double dt_min = static_cast<double>(to_epoch(cur.ts_utc) - to_epoch(prev.ts_utc)) / 60.0;
        double rise = *cur.eng_value - *prev.eng_value;
        if (dt_min * 60.0 <= static_cast<double>(options.max_interpolation_gap_s) && rise > 0.0) {
          minutes -= dt_min * (*cur.eng_value - options.threshold) / rise;
        }
      }
      return minutes;
    }
  }
  return std::nullopt;
}

OffsetVerdict detect_utc_offset_error(const Store& store, std::string_view channel_id, CivilDate first,
                                      CivilDate last, const DetectOptions& options) {
  auto manifest = store.manifest();
  auto ref = manifest.channel(channel_id);
  const Site& site = *ref.site;
  if (std::chrono::sys_days{last} < std::chrono::sys_days{first}) {
    throw Error(ErrorCode::kInvertedRange, "date range is inverted");
  }

  OffsetVerdict verdict;
  std::vector<double> residuals;
  for (auto d = std::chrono::sys_days{first}; d < std::chrono::sys_days{last}; d += std::chrono::days{1}) {
    SunriseEstimate est;
    est.date = CivilDate{d};
    auto from = local_midnight(est.date, site.utc_offset_standard);
    auto records = store.read_records(channel_id, from, from + std::chrono::days{1});
    std::erase_if(records, [](const SensorRecord& r) {
      return r.flags.contains(QualityFlag::kOutOfRange) || r.flags.contains(QualityFlag::kMissing);
    });
    est.observed_local_std = observed_sunrise(records, site.utc_offset_standard, options.sunrise);
    try {
      est.expected_local_std = expected_sunrise(site.latitude, site.longitude, site.utc_offset_standard, est.date);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kPolarDayNight) throw;
    }
    if (est.observed_local_std && est.expected_local_std) {
      est.residual_min = *est.observed_local_std - *est.expected_local_std;
      residuals.push_back(*est.residual_min);
    }
    verdict.days.push_back(est);
  }
  verdict.days_used = verdict.days.size();

  std::vector<double> kept;
  if (!residuals.empty()) {
    double preliminary = median(residuals);
    for (auto& est : verdict.days) {
      if (est.residual_min && std::abs(*est.residual_min - preliminary) <= options.outlier_min) {
        est.used = true;
        kept.push_back(*est.residual_min);
      }
    }
  }
  if (kept.size() < options.min_days) {
    throw Error(ErrorCode::kInsufficientDays, "only " + std::to_string(kept.size()) +
                                                  " days with an observable sunrise; need " +
                                                  std::to_string(options.min_days));
  }
  verdict.median_residual_min = median(kept);
  verdict.offset_hours = static_cast<int>(std::clamp(std::lround(verdict.median_residual_min / 60.0), -12L, 12L));
  std::size_t agreeing = 0;
  for (const auto& est : verdict.days) {
    if (est.used && std::lround(*est.residual_min / 60.0) == verdict.offset_hours) ++agreeing;
  }
  verdict.confidence = static_cast<double>(agreeing) / static_cast<double>(verdict.days_used);
  verdict.drift_warning =
      std::abs(verdict.median_residual_min - 60.0 * verdict.offset_hours) > options.drift_tolerance_min;
  return verdict;
}

std::size_t apply_time_correction(Store& store, std::string_view channel_id, CivilDate first, CivilDate last,
                                  int offset_hours, std::string_view user) {
  if (offset_hours == 0) throw Error(ErrorCode::kInvalidArgument, "offset_hours must be non-zero");
  if (std::abs(offset_hours) > 12) throw Error(ErrorCode::kInvalidArgument, "offset_hours must be within +-12");
  auto batch = store.begin_write();
  auto manifest = store.manifest();
  auto ref = manifest.channel(channel_id);
  auto [from, to] = local_window(*ref.site, first, last);
  if (to < from) throw Error(ErrorCode::kInvertedRange, "date range is inverted");

  const auto shift = std::chrono::hours{offset_hours};
  auto affected = store.read_records(channel_id, from, to);
  if (affected.empty()) return 0;

  std::vector<SensorRecord> moved;
  moved.reserve(affected.size());
  for (auto r : affected) {
    r.ts_utc -= shift;
    r.flags.insert(QualityFlag::kTimeCorrected);
    moved.push_back(r);
  }
  // Only records outside the window survive the rewrite, so those are the
  // only possible collisions.
  auto lo = std::min(moved.front().ts_utc, from);
  auto hi = std::max(moved.back().ts_utc + std::chrono::seconds{1}, to);
  std::set<std::int64_t> outside;
  for (const auto& r : store.read_records(channel_id, lo, hi)) {
    if (r.ts_utc < from || r.ts_utc >= to) outside.insert(to_epoch(r.ts_utc));
  }
  for (const auto& r : moved) {
    if (outside.count(to_epoch(r.ts_utc))) {
      throw Error(ErrorCode::kOverlapAfterShift, "shifted record collides with existing record at " +
                                                     format_iso_utc(r.ts_utc));
    }
  }

  auto ledger = ingest::Ledger::load(store);
  std::set<std::string> sources;
  for (const auto& r : affected) {
    for (auto& id : ingest::trace_record(ledger, channel_id, r).uploads) sources.insert(id);
  }
  ingest::Amendment amendment;
  amendment.created_at_utc = ingest::now_utc();
  amendment.user = user.empty() ? "system" : std::string(user);
  amendment.amends.assign(sources.begin(), sources.end());
  amendment.operation = "time_correction";
  amendment.channel_id = std::string(channel_id);
  amendment.range_from = from;
  amendment.range_to = to;
  amendment.offset_hours = offset_hours;
  amendment.corrected_count = moved.size();
  std::vector<Instant> new_ts;
  new_ts.reserve(moved.size());
  for (const auto& r : moved) new_ts.push_back(r.ts_utc);
  amendment.moved = ingest::compress_runs(new_ts);
  amendment.notes = "shifted by " + std::to_string(-offset_hours) + " h";
  amendment.amendment_id =
      "a" + ingest::sha256_hex(std::string(channel_id) + "|" + format_iso_utc(from) + "|" + format_iso_utc(to) + "|" +
                               std::to_string(offset_hours) + "|" + std::to_string(ledger.amendments().size()))
                .substr(0, 15);

  batch.replace_range(channel_id, from, to, std::move(moved));
  batch.append_ledger_line(ingest::to_json(amendment).dump());
  batch.commit();
  return amendment.corrected_count;
}

}  // namespace envnet::timecal
