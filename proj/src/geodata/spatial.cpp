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

#include "nbrs/geodata/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "nbrs/errors.hpp"

namespace nbrs::geo {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kKmPerDegree = kEarthRadiusKm * kDeg;

void check_radius(double radius_km) {
  if (!(radius_km > 0.0)) throw UsageError("radius must be positive");
}

void sort_candidates(std::vector<Candidate>& c) {
  std::sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) {
    if (a.distance_km != b.distance_km) return a.distance_km < b.distance_km;
    return a.index < b.index;
  });
}

std::int64_t cell_key(std::int64_t row, std::int64_t col) {
  return row * (std::int64_t{1} << 32) + col;
}

}  // namespace

double haversine_km(LatLon a, LatLon b) {
  const double p1 = a.lat * kDeg;
  const double p2 = b.lat * kDeg;
  const double dp = (b.lat - a.lat) * kDeg;
  const double dl = (b.lon - a.lon) * kDeg;
  const double s1 = std::sin(dp / 2);
  const double s2 = std::sin(dl / 2);
  double h = s1 * s1 + std::cos(p1) * std::cos(p2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

CandidateMap bucket_brute_force(const FeatureStore& store, double radius_km) {
  check_radius(radius_km);
  const std::size_t n = store.size();
  CandidateMap out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = haversine_km(store[i].pos, store[j].pos);
      if (d <= radius_km) out[i].push_back({j, d});
    }
    sort_candidates(out[i]);
  }
  return out;
}

CandidateMap bucket(const FeatureStore& store, double radius_km) {
  check_radius(radius_km);
  const std::size_t n = store.size();
  const double cell_deg = std::min(radius_km / kKmPerDegree, 180.0);
  const auto lon_cells =
      static_cast<std::int64_t>(std::ceil(360.0 / cell_deg));
  auto row_of = [&](double lat) {
    return static_cast<std::int64_t>(std::floor((lat + 90.0) / cell_deg));
  };
  auto col_of = [&](double lon) {
    auto c = static_cast<std::int64_t>(std::floor((lon + 180.0) / cell_deg));
    return ((c % lon_cells) + lon_cells) % lon_cells;
  };

  std::unordered_map<std::int64_t, std::vector<std::size_t>> grid;
  for (std::size_t i = 0; i < n; ++i) {
    grid[cell_key(row_of(store[i].pos.lat), col_of(store[i].pos.lon))]
        .push_back(i);
  }

  CandidateMap out(n);
  const double dlat_deg = radius_km / kKmPerDegree;
#pragma omp parallel for schedule(dynamic, 64) if (n > 512)
  for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const LatLon p = store[i].pos;
    const std::int64_t row = row_of(p.lat);
    const std::int64_t col = col_of(p.lon);
    const std::int64_t drow =
        static_cast<std::int64_t>(std::ceil(dlat_deg / cell_deg)) + 1;

    // Any point within the radius has cos(lat) >= cos(max_abs_lat), which
    // bounds its longitude offset.
    const double max_abs_lat = std::min(90.0, std::abs(p.lat) + dlat_deg);
    const double denom =
        std::sqrt(std::max(0.0, std::cos(p.lat * kDeg)) *
                  std::max(0.0, std::cos(max_abs_lat * kDeg)));
    const double arg =
        denom > 0.0 ? std::sin(radius_km / (2.0 * kEarthRadiusKm)) / denom : 2.0;
    std::int64_t dcol = lon_cells;
    if (arg < 1.0) {
      const double dlon_deg = 2.0 * std::asin(arg) / kDeg;
      dcol = static_cast<std::int64_t>(std::ceil(dlon_deg / cell_deg)) + 1;
    }
    const bool all_cols = 2 * dcol + 1 >= lon_cells;
    const std::int64_t c_lo = all_cols ? 0 : col - dcol;
    const std::int64_t c_hi = all_cols ? lon_cells - 1 : col + dcol;

    auto& found = out[i];
    for (std::int64_t r = row - drow; r <= row + drow; ++r) {
      for (std::int64_t c = c_lo; c <= c_hi; ++c) {
        const std::int64_t wc = ((c % lon_cells) + lon_cells) % lon_cells;
        auto it = grid.find(cell_key(r, wc));
        if (it == grid.end()) continue;
        for (std::size_t j : it->second) {
          if (j == i) continue;
          const double d = haversine_km(p, store[j].pos);
          if (d <= radius_km) found.push_back({j, d});
        }
      }
    }
    sort_candidates(found);
  }
  return out;
}

}  // namespace nbrs::geo
