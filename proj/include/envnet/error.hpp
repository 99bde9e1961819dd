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

#include <stdexcept>
#include <string>
#include <string_view>

namespace envnet {

// Closed set of failure causes. Each code maps to exactly one HTTP status
// and one CLI exit code (see api/errors).
enum class ErrorCode {
  kNotAStore,
  kCorruptManifest,
  kCorruptStore,
  kInvalidManifest,
  kUnknownChannel,
  kUnknownDeployment,
  kUnknownVariable,
  kUnknownUpload,
  kUnsortedInput,
  kInvertedRange,
  kUnknownDialect,
  kAmbiguousDialect,
  kMalformedHeader,
  kPolarDayNight,
  kInsufficientDays,
  kOverlapAfterShift,
  kDuplicateUpload,
  kStoreWriteFailure,
  kEmptySpec,
  kNoCalibration,
  kNightOrDegenerate,
  kEmptyPoints,
  kBadParams,
  kInvalidArgument,
  kUnknownParameter,
  kUnauthorized,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const { return code_; }
  // Machine-readable context, e.g. the prior upload id on kDuplicateUpload.
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace envnet
