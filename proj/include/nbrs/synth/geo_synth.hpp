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
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nbrs/geodata/feature.hpp"
#include "nbrs/geodata/neighborhood.hpp"
#include "nbrs/model/config.hpp"

namespace nbrs::synth {

// A spelling with two readings; which one an area uses is only visible
// through the other features of that area.
struct AmbiguousSpelling {
  std::string spelling;
  std::string p1;
  std::string p2;
};

const std::vector<AmbiguousSpelling>& ambiguous_spellings();

enum class ReadingRule {
  kPerArea,      // fair coin per area
  kByLongitude,  // P1 west of the bounds' midpoint, P2 east of it
};

struct GeoSynthConfig {
  std::size_t areas = 300;
  std::size_t min_ambiguous = 4;  // features using the area's spelling
  std::size_t max_ambiguous = 6;
  std::size_t min_filler = 1;     // unambiguous features
  std::size_t max_filler = 2;
  double unpronounced = 0.0;      // share of features without a reading
  double area_radius_km = 1.5;
  double spacing_deg = 0.3;       // area grid pitch; keeps areas apart
  ReadingRule rule = ReadingRule::kPerArea;
  double p1_share = 0.5;          // chance an area reads P1 under kPerArea
  model::LatLonBounds bounds;
  std::uint64_t seed = 1;
};

struct SynthLabel {
  int spelling = -1;  // index into ambiguous_spellings(), -1 for fillers
  int reading = 0;    // 1 or 2 for ambiguous features
  std::size_t area = 0;
};

struct GeoCorpus {
  std::vector<geo::FeatureRecord> features;
  std::vector<SynthLabel> labels;  // parallel to features

  const SynthLabel* find(const std::string& id) const;
};

GeoCorpus generate_geo(const GeoSynthConfig& cfg);

// Neighborhoods of every pronounced feature of the corpus.
std::vector<geo::Neighborhood> neighborhoods_of(const GeoCorpus& c,
                                                double radius_km = 10.0,
                                                geo::NeighborCaps caps = {8, 2});

// id \t spelling \t reading (1|2) \t area, ambiguous features only.
void write_labels_tsv(std::ostream& out, const GeoCorpus& c);

}  // namespace nbrs::synth
