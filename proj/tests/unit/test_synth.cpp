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

#include <set>

#include "doctest.h"
#include "nbrs/errors.hpp"
#include "nbrs/synth/geo_synth.hpp"

using namespace nbrs;
using namespace nbrs::synth;

TEST_CASE("geo corpus shape") {
  GeoSynthConfig cfg;
  cfg.areas = 50;
  cfg.seed = 4;
  const auto c = generate_geo(cfg);
  REQUIRE(c.features.size() == c.labels.size());
  std::vector<std::size_t> amb(cfg.areas), fill(cfg.areas);
  std::vector<int> reading(cfg.areas, 0);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < c.features.size(); ++i) {
    const auto& f = c.features[i];
    const auto& l = c.labels[i];
    CHECK(ids.insert(f.id).second);
    CHECK(f.id.size() == 8);
    CHECK(f.has_pron());
    CHECK(f.pos.lat >= cfg.bounds.lat_min);
    CHECK(f.pos.lat <= cfg.bounds.lat_max);
    CHECK(f.pos.lon >= cfg.bounds.lon_min);
    CHECK(f.pos.lon <= cfg.bounds.lon_max);
    REQUIRE(l.area < cfg.areas);
    if (l.spelling < 0) {
      ++fill[l.area];
      continue;
    }
    ++amb[l.area];
    const auto& sp = ambiguous_spellings()[static_cast<std::size_t>(l.spelling)];
    CHECK(f.name.find(sp.spelling) != std::string::npos);
    CHECK(f.pron.find(l.reading == 1 ? sp.p1 : sp.p2) != std::string::npos);
    // One reading per area.
    if (reading[l.area] == 0) reading[l.area] = l.reading;
    CHECK(reading[l.area] == l.reading);
  }
  for (std::size_t a = 0; a < cfg.areas; ++a) {
    CHECK(amb[a] >= cfg.min_ambiguous);
    CHECK(amb[a] <= cfg.max_ambiguous);
    CHECK(fill[a] >= cfg.min_filler);
    CHECK(fill[a] <= cfg.max_filler);
  }
}

TEST_CASE("neighborhoods stay inside areas") {
  GeoSynthConfig cfg;
  cfg.areas = 40;
  const auto c = generate_geo(cfg);
  const auto hoods = neighborhoods_of(c);
  CHECK(hoods.size() == c.features.size());
  for (const auto& n : hoods) {
    const auto* t = c.find(n.target.id);
    REQUIRE(t != nullptr);
    CHECK(!n.neighbors.empty());
    for (const auto& nb : n.neighbors) {
      const auto* l = c.find(nb.id);
      REQUIRE(l != nullptr);
      CHECK(l->area == t->area);
      if (t->spelling >= 0 && l->spelling == t->spelling) CHECK(l->reading == t->reading);
    }
  }
}

TEST_CASE("reading rules") {
  GeoSynthConfig cfg;
  cfg.areas = 60;
  cfg.rule = ReadingRule::kByLongitude;
  const auto c = generate_geo(cfg);
  const double mid = 0.5 * (cfg.bounds.lon_min + cfg.bounds.lon_max);
  std::size_t west = 0, east = 0;
  for (std::size_t i = 0; i < c.features.size(); ++i) {
    const auto& l = c.labels[i];
    if (l.spelling < 0) continue;
    // Features sit within an area radius of a centre on the grid.
    const double lon = c.features[i].pos.lon;
    if (lon < mid - 0.1) {
      CHECK(l.reading == 1);
      ++west;
    } else if (lon > mid + 0.1) {
      CHECK(l.reading == 2);
      ++east;
    }
  }
  CHECK(west > 0);
  CHECK(east > 0);

  cfg.rule = ReadingRule::kPerArea;
  cfg.p1_share = 1.0;
  for (const auto& l : generate_geo(cfg).labels) {
    if (l.spelling >= 0) CHECK(l.reading == 1);
  }
}

TEST_CASE("generation is seed-deterministic") {
  GeoSynthConfig cfg;
  cfg.areas = 20;
  cfg.unpronounced = 0.2;
  const auto a = generate_geo(cfg);
  const auto b = generate_geo(cfg);
  REQUIRE(a.features.size() == b.features.size());
  std::size_t silent = 0;
  for (std::size_t i = 0; i < a.features.size(); ++i) {
    CHECK(geo::to_json(a.features[i]) == geo::to_json(b.features[i]));
    silent += !a.features[i].has_pron();
  }
  CHECK(silent > 0);
  cfg.seed = 2;
  CHECK(geo::to_json(generate_geo(cfg).features[0]) != geo::to_json(a.features[0]));
}

TEST_CASE("bad configurations") {
  GeoSynthConfig cfg;
  cfg.min_ambiguous = 0;
  CHECK_THROWS_AS(generate_geo(cfg), UsageError);
  cfg = {};
  cfg.areas = 1000000;
  CHECK_THROWS_AS(generate_geo(cfg), UsageError);
}
