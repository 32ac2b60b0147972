// Copyright (c) 2026 The nbrs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <vector>

#include "nbrs/geodata/feature.hpp"

namespace nbrs::geo {

inline constexpr double kEarthRadiusKm = 6371.0088;

double haversine_km(LatLon a, LatLon b);

struct Candidate {
  std::size_t index = 0;
  double distance_km = 0.0;

  bool operator==(const Candidate&) const = default;
};

// candidates[i] lists every other record within the radius, sorted by
// (distance, index).
using CandidateMap = std::vector<std::vector<Candidate>>;

// Grid index over lat/lon cells at least `radius_km` on a side. Longitude
// windows are widened by latitude and wrap at the antimeridian, so results
// equal the all-pairs scan exactly.
CandidateMap bucket(const FeatureStore& store, double radius_km = 10.0);
CandidateMap bucket_brute_force(const FeatureStore& store, double radius_km);

}  // namespace nbrs::geo
