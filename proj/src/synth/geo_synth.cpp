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

#include "nbrs/synth/geo_synth.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "nbrs/errors.hpp"
#include "nbrs/numerics/rng.hpp"

namespace nbrs::synth {

namespace {

struct Piece {
  const char* spelling;
  const char* reading;
};

// No suffix or filler kanji appears in an ambiguous spelling.
constexpr Piece kSuffixes[] = {
    {"駅", "えき"},         {"町", "まち"},         {"橋", "はし"},
    {"公園", "こうえん"},   {"小学校", "しょうがっこう"}, {"郵便局", "ゆうびんきょく"},
    {"病院", "びょういん"}, {"神社", "じんじゃ"},   {"通り", "どおり"},
    {"南口", "みなみぐち"}, {"図書館", "としょかん"}, {"団地", "だんち"}};
constexpr Piece kPrefixes[] = {{"", ""}, {"北", "きた"}, {"西", "にし"}, {"南", "みなみ"}};
constexpr Piece kFillers[] = {
    {"松", "まつ"}, {"竹", "たけ"}, {"梅", "うめ"}, {"桜", "さくら"},
    {"石", "いし"}, {"岩", "いわ"}, {"森", "もり"}, {"林", "はやし"},
    {"池", "いけ"}, {"浜", "はま"}, {"岡", "おか"}, {"坂", "さか"},
    {"宮", "みや"}, {"原", "はら"}, {"井", "い"},   {"星", "ほし"}};

geo::FeatureType type_of(std::string_view suffix) {
  if (suffix == "駅") return geo::FeatureType::kStation;
  if (suffix == "町") return geo::FeatureType::kMunicipality;
  if (suffix == "通り" || suffix == "橋") return geo::FeatureType::kStreet;
  if (suffix == "公園") return geo::FeatureType::kTopographic;
  return geo::FeatureType::kEstablishment;
}

template <class T, std::size_t N>
const T& pick(const T (&arr)[N], num::RngState& rng) {
  return arr[rng.below(N)];
}

}  // namespace

const std::vector<AmbiguousSpelling>& ambiguous_spellings() {
  static const std::vector<AmbiguousSpelling> kList{
      {"神戸", "こうべ", "かんべ"},   {"日本", "にほん", "にっぽん"},
      {"反町", "そりまち", "たんまち"}, {"大和", "やまと", "だいわ"},
      {"河内", "かわち", "こうち"},   {"角田", "かくだ", "つのだ"},
      {"上野", "うえの", "かみの"},   {"三田", "みた", "さんだ"},
      {"新田", "にった", "しんでん"}, {"吉川", "よしかわ", "きっかわ"},
      {"東山", "ひがしやま", "とうざん"}, {"小山", "おやま", "こやま"}};
  return kList;
}

const SynthLabel* GeoCorpus::find(const std::string& id) const {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].id == id) return &labels[i];
  }
  return nullptr;
}

GeoCorpus generate_geo(const GeoSynthConfig& cfg) {
  if (cfg.min_ambiguous == 0 || cfg.min_ambiguous > cfg.max_ambiguous ||
      cfg.min_filler > cfg.max_filler) {
    throw UsageError("synthetic corpus: inconsistent feature counts");
  }
  if (cfg.max_ambiguous > std::size(kSuffixes) * std::size(kPrefixes)) {
    throw UsageError("synthetic corpus: too many ambiguous features per area");
  }
  if (!(cfg.spacing_deg > 0.0)) throw UsageError("synthetic corpus: spacing must be positive");
  const auto& b = cfg.bounds;
  const auto rows = static_cast<std::size_t>((b.lat_max - b.lat_min) / cfg.spacing_deg);
  const auto cols = static_cast<std::size_t>((b.lon_max - b.lon_min) / cfg.spacing_deg);
  if (rows * cols < cfg.areas) throw UsageError("synthetic corpus: too many areas for the bounds");

  num::RngState rng(cfg.seed);
  auto slots = rng.permutation(rows * cols);
  const auto& spellings = ambiguous_spellings();
  const double lon_mid = 0.5 * (b.lon_min + b.lon_max);
  GeoCorpus out;
  std::size_t next_id = 1;
  auto add = [&](const std::string& name, const std::string& pron,
                 geo::LatLon centre, geo::FeatureType t, SynthLabel label) {
    // Uniform within the area disk.
    const double r = cfg.area_radius_km * std::sqrt(rng.uniform());
    const double theta = rng.uniform(0.0, 6.283185307179586);
    geo::FeatureRecord f;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08zx", next_id++);
    f.id = buf;
    f.name = name;
    f.pron = rng.bernoulli(cfg.unpronounced) ? "" : pron;
    f.pos.lat = centre.lat + r * std::cos(theta) / 111.2;
    f.pos.lon = centre.lon + r * std::sin(theta) /
                                 (111.2 * std::cos(centre.lat * 3.141592653589793 / 180.0));
    f.ftype = t;
    out.features.push_back(std::move(f));
    out.labels.push_back(label);
  };
  for (std::size_t a = 0; a < cfg.areas; ++a) {
    const std::size_t slot = slots[a];
    const geo::LatLon centre{
        b.lat_min + (static_cast<double>(slot / cols) + 0.5) * cfg.spacing_deg,
        b.lon_min + (static_cast<double>(slot % cols) + 0.5) * cfg.spacing_deg};
    const auto s = static_cast<int>(rng.below(spellings.size()));
    int reading = 0;
    if (cfg.rule == ReadingRule::kPerArea) {
      reading = rng.bernoulli(cfg.p1_share) ? 1 : 2;
    } else {
      reading = centre.lon < lon_mid ? 1 : 2;
    }
    const auto& sp = spellings[static_cast<std::size_t>(s)];
    const std::string& kana = reading == 1 ? sp.p1 : sp.p2;
    const std::size_t n_amb =
        cfg.min_ambiguous + rng.below(cfg.max_ambiguous - cfg.min_ambiguous + 1);
    std::set<std::string> used;
    while (used.size() < n_amb) {
      const auto& pre = pick(kPrefixes, rng);
      const auto& suf = pick(kSuffixes, rng);
      const std::string name = std::string(pre.spelling) + sp.spelling + suf.spelling;
      if (!used.insert(name).second) continue;
      add(name, std::string(pre.reading) + kana + suf.reading, centre, type_of(suf.spelling),
          {s, reading, a});
    }
    const std::size_t n_fill = cfg.min_filler + rng.below(cfg.max_filler - cfg.min_filler + 1);
    for (std::size_t k = 0; k < n_fill; ++k) {
      const auto& f1 = pick(kFillers, rng);
      const auto& f2 = pick(kFillers, rng);
      const auto& suf = pick(kSuffixes, rng);
      add(std::string(f1.spelling) + f2.spelling + suf.spelling,
          std::string(f1.reading) + f2.reading + suf.reading, centre, type_of(suf.spelling),
          {-1, 0, a});
    }
  }
  return out;
}

std::vector<geo::Neighborhood> neighborhoods_of(const GeoCorpus& c, double radius_km,
                                                geo::NeighborCaps caps) {
  geo::FeatureStore store;
  for (const auto& f : c.features) store.add(f);
  return geo::build_neighborhoods(store, radius_km, caps);
}

void write_labels_tsv(std::ostream& out, const GeoCorpus& c) {
  const auto& sp = ambiguous_spellings();
  for (std::size_t i = 0; i < c.features.size(); ++i) {
    const auto& l = c.labels[i];
    if (l.spelling < 0) continue;
    out << c.features[i].id << '\t' << sp[static_cast<std::size_t>(l.spelling)].spelling
        << '\t' << l.reading << '\t' << l.area << '\n';
  }
}

}  // namespace nbrs::synth
