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

#include "nbrs/geodata/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nbrs/errors.hpp"
#include "nbrs/numerics/rng.hpp"

namespace nbrs::geo {

SplitMode split_mode_from_string(std::string_view s) {
  if (s == "shuffled") return SplitMode::kShuffled;
  if (s == "unshuffled") return SplitMode::kUnshuffled;
  throw UsageError("unknown split mode '" + std::string(s) + "'");
}

std::string_view to_string(SplitMode m) {
  return m == SplitMode::kShuffled ? "shuffled" : "unshuffled";
}

RegionCell region_cell(LatLon p, double region_deg) {
  return {static_cast<std::int64_t>(std::floor(p.lat / region_deg)),
          static_cast<std::int64_t>(std::floor(p.lon / region_deg))};
}

Split split(const std::vector<Neighborhood>& data, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw UsageError("test fraction must lie in (0, 1)");
  }
  const std::size_t n = data.size();
  std::vector<char> in_test(n, 0);
  num::RngState rng(spec.seed);

  if (spec.mode == SplitMode::kShuffled) {
    const auto n_test = static_cast<std::size_t>(
        std::llround(spec.test_fraction * static_cast<double>(n)));
    const auto perm = rng.permutation(n);
    for (std::size_t i = 0; i < n_test; ++i) in_test[perm[i]] = 1;
  } else {
    if (!(spec.region_deg > 0.0)) throw UsageError("region size must be positive");
    std::map<RegionCell, std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < n; ++i) {
      cells[region_cell(data[i].target.pos, spec.region_deg)].push_back(i);
    }
    std::vector<const std::vector<std::size_t>*> order;
    for (const auto& [cell, members] : cells) order.push_back(&members);
    rng.shuffle(order);
    const double want = spec.test_fraction * static_cast<double>(n);
    std::size_t taken = 0;
    for (const auto* members : order) {
      if (static_cast<double>(taken) >= want) break;
      for (std::size_t i : *members) in_test[i] = 1;
      taken += members->size();
    }
    const double got = n ? static_cast<double>(taken) / static_cast<double>(n) : 0.0;
    if (n > 0 && (got > 2.0 * spec.test_fraction ||
                  got < 0.5 * spec.test_fraction || taken == n)) {
      throw DataError("region grid too coarse: achieved test fraction " +
                      std::to_string(got) + " for requested " +
                      std::to_string(spec.test_fraction));
    }
  }

  Split out;
  for (std::size_t i = 0; i < n; ++i) {
    (in_test[i] ? out.test : out.train).push_back(data[i]);
  }
  return out;
}

}  // namespace nbrs::geo
