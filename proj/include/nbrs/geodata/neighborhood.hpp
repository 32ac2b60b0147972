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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nbrs/geodata/feature.hpp"
#include "nbrs/geodata/spatial.hpp"

namespace nbrs::geo {

struct Neighbor {
  std::string id;
  std::string name;
  std::string pron;
  double distance_km = 0.0;
  bool interesting = false;  // shares a kanji bigram with the target name
};

// neighbors are sorted ascending by distance and never include the target.
struct Neighborhood {
  FeatureRecord target;
  std::vector<Neighbor> neighbors;

  std::size_t interesting_count() const;
};

struct NeighborCaps {
  std::size_t max_neighbors = 30;
  std::size_t max_plain = 5;
};

// Interesting candidates are admitted nearest-first up to max_neighbors,
// then plain ones nearest-first up to min(max_plain, remaining capacity).
// Candidates without a pronunciation are never admitted.
Neighborhood build_neighborhood(const FeatureRecord& target,
                                std::span<const Candidate> candidates,
                                const FeatureStore& store,
                                const NeighborCaps& caps = {});

struct BuildStats {
  std::size_t targets = 0;
  std::size_t skipped_unpronounced = 0;
  std::size_t with_interesting = 0;
  std::size_t total_neighbors = 0;
};

// One neighborhood per pronounced record, in store order.
std::vector<Neighborhood> build_neighborhoods(const FeatureStore& store,
                                              double radius_km,
                                              const NeighborCaps& caps,
                                              BuildStats* stats = nullptr);

nlohmann::json to_json(const Neighborhood& n);
Neighborhood neighborhood_from_json(const nlohmann::json& j);

void write_neighborhoods(std::ostream& out, std::span<const Neighborhood> ns);
void save_neighborhoods(const std::string& path,
                        std::span<const Neighborhood> ns);
// Throws DataError with the line number on malformed input.
std::vector<Neighborhood> read_neighborhoods(std::istream& in);
std::vector<Neighborhood> load_neighborhoods(const std::string& path);

}  // namespace nbrs::geo
