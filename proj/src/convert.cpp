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

#include "envnet/convert.hpp"

#include <string>

#include "envnet/error.hpp"

namespace envnet::query {

double convert_raw(Variable variable, double raw_value, const CalibrationSpec& calibration) {
  switch (calibration.kind) {
    case CalibrationSpec::Kind::kNone:
      throw Error(ErrorCode::kNoCalibration,
                  "no calibration for variable " + std::string(variable_name(variable)));
    case CalibrationSpec::Kind::kIdentity:
      return raw_value;
    case CalibrationSpec::Kind::kLinear:
      return calibration.scale * raw_value + calibration.offset;
    case CalibrationSpec::Kind::kTippingBucket:
      return calibration.scale * raw_value;
  }
  return raw_value;
}

}  // namespace envnet::query
