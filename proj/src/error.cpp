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

#include "envnet/error.hpp"

namespace envnet {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotAStore: return "NOT_A_STORE";
    case ErrorCode::kCorruptManifest: return "CORRUPT_MANIFEST";
    case ErrorCode::kCorruptStore: return "CORRUPT_STORE";
    case ErrorCode::kInvalidManifest: return "INVALID_MANIFEST";
    case ErrorCode::kUnknownChannel: return "UNKNOWN_CHANNEL";
    case ErrorCode::kUnknownDeployment: return "UNKNOWN_DEPLOYMENT";
    case ErrorCode::kUnknownVariable: return "UNKNOWN_VARIABLE";
    case ErrorCode::kUnknownUpload: return "UNKNOWN_UPLOAD";
    case ErrorCode::kUnsortedInput: return "UNSORTED_INPUT";
    case ErrorCode::kInvertedRange: return "INVERTED_RANGE";
    case ErrorCode::kUnknownDialect: return "UNKNOWN_DIALECT";
    case ErrorCode::kAmbiguousDialect: return "AMBIGUOUS_DIALECT";
    case ErrorCode::kMalformedHeader: return "MALFORMED_HEADER";
    case ErrorCode::kPolarDayNight: return "POLAR_DAY_NIGHT";
    case ErrorCode::kInsufficientDays: return "INSUFFICIENT_DAYS";
    case ErrorCode::kOverlapAfterShift: return "OVERLAP_AFTER_SHIFT";
    case ErrorCode::kDuplicateUpload: return "DUPLICATE_UPLOAD";
    case ErrorCode::kStoreWriteFailure: return "STORE_WRITE_FAILURE";
    case ErrorCode::kEmptySpec: return "EMPTY_SPEC";
    case ErrorCode::kNoCalibration: return "NO_CALIBRATION";
    case ErrorCode::kNightOrDegenerate: return "NIGHT_OR_DEGENERATE";
    case ErrorCode::kEmptyPoints: return "EMPTY_POINTS";
    case ErrorCode::kBadParams: return "BAD_PARAMS";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kUnknownParameter: return "UNKNOWN_PARAMETER";
    case ErrorCode::kUnauthorized: return "UNAUTHORIZED";
    case ErrorCode::kIo: return "IO_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace envnet
