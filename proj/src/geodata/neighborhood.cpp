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

#include "nbrs/geodata/neighborhood.hpp"

#include <algorithm>
#include <fstream>

#include "nbrs/errors.hpp"
#include "nbrs/numerics/parallel.hpp"
#include "nbrs/textdata/unicode.hpp"

namespace nbrs::geo {

std::size_t Neighborhood::interesting_count() const {
  return static_cast<std::size_t>(
      std::count_if(neighbors.begin(), neighbors.end(),
                    [](const Neighbor& n) { return n.interesting; }));
}

Neighborhood build_neighborhood(const FeatureRecord& target,
                                std::span<const Candidate> candidates,
                                const FeatureStore& store,
                                const NeighborCaps& caps) {
  std::vector<Candidate> sorted(candidates.begin(), candidates.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.distance_km < b.distance_km;
                   });

  std::vector<Neighbor> interesting;
  std::vector<Neighbor> plain;
  for (const Candidate& c : sorted) {
    const FeatureRecord& r = store[c.index];
    if (!r.has_pron() || r.id == target.id) continue;
    Neighbor n{r.id, r.name, r.pron, c.distance_km,
               text::shares_kanji_bigram(target.name, r.name)};
    if (n.interesting) {
      if (interesting.size() < caps.max_neighbors) interesting.push_back(n);
    } else if (plain.size() < caps.max_plain) {
      plain.push_back(n);
    }
  }
  const std::size_t room = caps.max_neighbors - interesting.size();
  plain.resize(std::min(plain.size(), room));

  Neighborhood out{target, {}};
  out.neighbors.reserve(interesting.size() + plain.size());
  std::merge(interesting.begin(), interesting.end(), plain.begin(),
             plain.end(), std::back_inserter(out.neighbors),
             [](const Neighbor& a, const Neighbor& b) {
               return a.distance_km < b.distance_km;
             });
  return out;
}

std::vector<Neighborhood> build_neighborhoods(const FeatureStore& store,
                                              double radius_km,
                                              const NeighborCaps& caps,
                                              BuildStats* stats) {
  const CandidateMap cands = bucket(store, radius_km);
  std::vector<std::size_t> targets;
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (store[i].has_pron()) targets.push_back(i);
  }
  std::vector<Neighborhood> out(targets.size());
  num::parallel_for(targets.size(), [&](std::size_t t) {
    const std::size_t i = targets[t];
    out[t] = build_neighborhood(store[i], cands[i], store, caps);
  });
  if (stats) {
    *stats = {};
    stats->targets = out.size();
    stats->skipped_unpronounced = store.size() - targets.size();
    for (const auto& n : out) {
      if (n.interesting_count() > 0) ++stats->with_interesting;
      stats->total_neighbors += n.neighbors.size();
    }
  }
  return out;
}

nlohmann::json to_json(const Neighborhood& n) {
  nlohmann::json j;
  j["target"] = to_json(n.target);
  auto arr = nlohmann::json::array();
  for (const auto& nb : n.neighbors) {
    arr.push_back({{"id", nb.id},
                   {"name", nb.name},
                   {"pron", nb.pron},
                   {"distance_km", nb.distance_km},
                   {"interesting", nb.interesting}});
  }
  j["neighbors"] = std::move(arr);
  return j;
}

Neighborhood neighborhood_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("target")) {
    throw DataError("neighborhood lacks 'target'");
  }
  Neighborhood n;
  n.target = feature_from_json(j.at("target"));
  if (j.contains("neighbors")) {
    const auto& arr = j.at("neighbors");
    if (!arr.is_array()) throw DataError("'neighbors' must be an array");
    for (const auto& e : arr) {
      Neighbor nb;
      nb.id = e.value("id", std::string());
      nb.name = e.at("name").get<std::string>();
      nb.pron = text::to_hiragana(e.at("pron").get<std::string>());
      nb.distance_km = e.value("distance_km", 0.0);
      nb.interesting = e.contains("interesting")
                           ? e.at("interesting").get<bool>()
                           : text::shares_kanji_bigram(n.target.name, nb.name);
      if (nb.distance_km < 0.0) throw DataError("negative neighbor distance");
      n.neighbors.push_back(std::move(nb));
    }
  }
  return n;
}

void write_neighborhoods(std::ostream& out, std::span<const Neighborhood> ns) {
  for (const auto& n : ns) out << to_json(n).dump() << '\n';
}

void save_neighborhoods(const std::string& path,
                        std::span<const Neighborhood> ns) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_neighborhoods(out, ns);
}

std::vector<Neighborhood> read_neighborhoods(std::istream& in) {
  std::vector<Neighborhood> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(neighborhood_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Neighborhood> load_neighborhoods(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open neighborhood file '" + path + "'");
  return read_neighborhoods(in);
}

}  // namespace nbrs::geo
