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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "envnet/store.hpp"
#include "envnet/types.hpp"

namespace envnet::timecal {

// Sun centre 50 arc-minutes below the horizon: refraction plus solar radius.
inline constexpr double kSunriseZenithDeg = 90.833;

// Cooper's declination for day-of-year n (1-based), radians.
double solar_declination(int day_of_year);
// Spencer's equation of time, minutes.
double equation_of_time(int day_of_year);

// Minutes after local-standard midnight. Throws kPolarDayNight when the sun
// does not cross the sunrise zenith on that date.
double expected_sunrise(double latitude, double longitude, int utc_offset_standard, CivilDate date);

// Cosine of the solar zenith angle at a UTC instant, same model as above.
double cos_solar_zenith(double latitude, double longitude, int utc_offset_standard, Instant utc);

struct SunriseOptions {
  double threshold = 10.0;  // umol m-2 s-1
  int sustain = 2;          // consecutive samples at or above threshold
  // Place the crossing on the line between the run's first sample and the
  // sample before it instead of reporting the first sample's time.
  bool interpolate = true;
  std::int64_t max_interpolation_gap_s = 3600;
};

// First sample of `day` (ascending, one local-standard day) that opens a run
// of `sustain` samples at or above threshold; minutes after local midnight.
// With interpolate set, the threshold crossing between that sample and its
// predecessor.
std::optional<double> observed_sunrise(std::span<const SensorRecord> day, int utc_offset_standard,
                                       const SunriseOptions& options = {});

struct SunriseEstimate {
  CivilDate date;
  std::optional<double> observed_local_std;
  std::optional<double> expected_local_std;
  std::optional<double> residual_min;
  bool used = false;
};

struct OffsetVerdict {
  int offset_hours = 0;
  double confidence = 0.0;
  std::size_t days_used = 0;
  bool drift_warning = false;
  double median_residual_min = 0.0;
  std::vector<SunriseEstimate> days;
};

struct DetectOptions {
  SunriseOptions sunrise;
  std::size_t min_days = 5;
  // Days further than this from the preliminary median are outliers.
  double outlier_min = 120.0;
  double drift_tolerance_min = 15.0;
};

// Local-standard dates [first, last). Throws kInsufficientDays.
OffsetVerdict detect_utc_offset_error(const Store& store, std::string_view channel_id, CivilDate first,
                                      CivilDate last, const DetectOptions& options = {});

// Shifts records dated [first, last) by -offset_hours, flags them
// TIME_CORRECTED and appends a linked provenance amendment.
// Throws kInvalidArgument for offset 0, kOverlapAfterShift on collision.
std::size_t apply_time_correction(Store& store, std::string_view channel_id, CivilDate first, CivilDate last,
                                  int offset_hours, std::string_view user = "system");

}  // namespace envnet::timecal
