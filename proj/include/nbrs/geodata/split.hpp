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

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "nbrs/geodata/neighborhood.hpp"

namespace nbrs::geo {

enum class SplitMode { kShuffled, kUnshuffled };

SplitMode split_mode_from_string(std::string_view s);
std::string_view to_string(SplitMode m);

struct SplitSpec {
  SplitMode mode = SplitMode::kShuffled;
  double test_fraction = 0.1;
  double region_deg = 0.5;
  std::uint64_t seed = 1;
};

struct Split {
  std::vector<Neighborhood> train;
  std::vector<Neighborhood> test;
};

using RegionCell = std::pair<std::int64_t, std::int64_t>;
RegionCell region_cell(LatLon p, double region_deg);

// Both sides keep the input order. Unshuffled mode moves whole region cells
// to test and throws DataError when the achieved fraction is off by more
// than a factor of two.
Split split(const std::vector<Neighborhood>& data, const SplitSpec& spec);

}  // namespace nbrs::geo
