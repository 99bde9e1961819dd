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

#include <string>
#include <string_view>
#include <vector>

#include "envnet/formats.hpp"
#include "envnet/provenance.hpp"
#include "envnet/store.hpp"

namespace envnet::ingest {

// A node whose rejected-row fraction in one upload exceeds this is named in
// a DEPLOYMENT_SUSPECT warning. The upload still completes.
inline constexpr double kSuspectRejectRate = 0.25;
inline constexpr std::string_view kDefaultUser = "system";

struct IngestResult {
  std::string upload_id;
  formats::ParseReport report;
  std::size_t records_written = 0;
  std::size_t duplicates = 0;
};

// options are key=value strings recorded verbatim in provenance. Recognized
// keys: deployment=<id> (otherwise inferred from the file), notes=<text>.
// Throws kDuplicateUpload (detail = prior upload id), kUnknownDialect,
// kMalformedHeader, kUnknownDeployment, kStoreWriteFailure.
IngestResult ingest_file(Store& store, std::string_view bytes, std::string_view source_name, std::string_view user,
                         const std::vector<std::string>& options);

std::string quarantine_path(std::string_view upload_id);

}  // namespace envnet::ingest
