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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "envnet/manifest.hpp"
#include "envnet/store.hpp"
#include "envnet/types.hpp"

namespace envnet::derive {

// McCree quantum-to-energy factor for daylight PAR, umol per joule.
inline constexpr double kMcCree = 4.57;
inline constexpr double kDefaultExtinction = 0.5;
inline constexpr double kLaiMax = 10.0;
inline constexpr double kFootprintViewAngleDeg = 85.0;
// NIR reflectance = (pyranometer band - PAR band) reflected / incoming.
inline constexpr std::string_view kNdviMethod = "broadband-nir-by-subtraction";

double par_energy(double par_flux, double umol_per_joule = kMcCree);

struct RadiationQuadruple {
  double par_in = 0.0;    // umol m-2 s-1
  double par_refl = 0.0;  // umol m-2 s-1
  double pyr_in = 0.0;    // W m-2
  double pyr_refl = 0.0;  // W m-2
  Instant ts;
};

struct IndexPoint {
  Instant ts;
  double ndvi = 0.0;
  double evi2 = 0.0;
  double rho_par = 0.0;
  double rho_nir = 0.0;
  bool clamped = false;
};

// Throws kNightOrDegenerate when incoming PAR or incoming NIR energy is at or
// below 1 W m-2.
IndexPoint broadband_ndvi(const RadiationQuadruple& q, double umol_per_joule = kMcCree);

// Two-band EVI (no blue band).
double evi2(double rho_nir, double rho_par);

struct CanopyLight {
  double transmittance = 1.0;
  double fapar = 0.0;
  double lai = 0.0;
  bool capped = false;   // transmittance 0, lai held at kLaiMax
  bool flagged = false;  // understory above incoming; transmittance clamped to 1
};

// Beer-Lambert inversion. Throws kNightOrDegenerate when par_above is at or
// below 1 W m-2 equivalent.
CanopyLight fapar_and_lai(double par_above, double par_understory, double extinction = kDefaultExtinction);

// Magnus form, kPa.
double vpd(double temp_c, double rh_pct);

// Radius of ground seen by a sensor h metres above the target surface.
double footprint_radius(double height_m);

enum class Product { kNdvi, kEvi2, kFapar, kLai, kVpd };

std::string_view product_name(Product p);
std::optional<Product> parse_product(std::string_view name);

// Virtual channel `derived:<product>:<node_id>`.
struct DerivedChannel {
  Product product = Product::kNdvi;
  std::string node_id;

  std::string id() const;
};

std::optional<DerivedChannel> parse_derived_channel(std::string_view channel_id);

// The node a derived channel is computed for; throws kUnknownChannel.
ChannelRef derived_context(const Manifest& manifest, const DerivedChannel& channel);

// Per-timestamp derived values over [from, to). raw and eng both carry the
// value; flags are the union of the inputs' flags, plus OUT_OF_RANGE for
// clamped or capped points. Night and degenerate points are skipped.
std::vector<SensorRecord> derived_records(const Store& store, const Manifest& manifest,
                                          const DerivedChannel& channel, Instant from, Instant to);

}  // namespace envnet::derive
