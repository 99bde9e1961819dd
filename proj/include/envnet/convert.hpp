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

#include "envnet/types.hpp"

namespace envnet::query {

// Raw logger reading (volts, pulse counts, ...) to engineering units.
// Throws Error(kNoCalibration) when the channel has no calibration.
double convert_raw(Variable variable, double raw_value, const CalibrationSpec& calibration);

}  // namespace envnet::query
