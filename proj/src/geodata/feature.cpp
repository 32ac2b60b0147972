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

#include "nbrs/geodata/feature.hpp"

#include <array>
#include <fstream>

#include "nbrs/errors.hpp"
#include "nbrs/textdata/unicode.hpp"

namespace nbrs::geo {
namespace {

constexpr std::array<std::pair<FeatureType, std::string_view>, 7> kTypeNames{{
    {FeatureType::kMunicipality, "municipality"},
    {FeatureType::kStreet, "street"},
    {FeatureType::kBuilding, "building"},
    {FeatureType::kEstablishment, "establishment"},
    {FeatureType::kTopographic, "topographic"},
    {FeatureType::kStation, "station"},
    {FeatureType::kOther, "other"},
}};

}  // namespace

std::string_view to_string(FeatureType t) {
  for (const auto& [type, name] : kTypeNames) {
    if (type == t) return name;
  }
  return "other";
}

FeatureType feature_type_from_string(std::string_view s) {
  for (const auto& [type, name] : kTypeNames) {
    if (name == s) return type;
  }
  return FeatureType::kOther;
}

nlohmann::json to_json(const FeatureRecord& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["name"] = r.name;
  j["pron"] = r.pron;
  j["lat"] = r.pos.lat;
  j["lon"] = r.pos.lon;
  j["ftype"] = std::string(to_string(r.ftype));
  return j;
}

FeatureRecord feature_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("record is not a JSON object");
  FeatureRecord r;
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw DataError(std::string("missing field '") + key + "'");
    return j.at(key);
  };
  const auto& id = need("id");
  const auto& name = need("name");
  const auto& lat = need("lat");
  const auto& lon = need("lon");
  if (!id.is_string() || id.get<std::string>().empty()) {
    throw DataError("field 'id' must be a nonempty string");
  }
  const std::string id_str = id.get<std::string>();
  std::string_view hex = id_str;
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  if (hex.empty() || hex.find_first_not_of("0123456789abcdefABCDEF") !=
                         std::string_view::npos) {
    throw DataError("field 'id' is not hexadecimal: '" + id_str + "'");
  }
  if (!name.is_string() || name.get<std::string>().empty()) {
    throw DataError("field 'name' must be a nonempty string");
  }
  if (!lat.is_number() || !lon.is_number()) {
    throw DataError("fields 'lat'/'lon' must be numbers");
  }
  r.id = id_str;
  r.name = name.get<std::string>();
  r.pos = {lat.get<double>(), lon.get<double>()};
  if (!(r.pos.lat >= -90.0 && r.pos.lat <= 90.0)) {
    throw DataError("latitude out of range");
  }
  if (!(r.pos.lon >= -180.0 && r.pos.lon <= 180.0)) {
    throw DataError("longitude out of range");
  }
  if (j.contains("pron") && j["pron"].is_string()) {
    r.pron = text::to_hiragana(j["pron"].get<std::string>());
  }
  if (j.contains("ftype") && j["ftype"].is_string()) {
    r.ftype = feature_type_from_string(j["ftype"].get<std::string>());
  }
  return r;
}

FeatureStore::FeatureStore(std::vector<FeatureRecord> records) {
  for (auto& r : records) add(std::move(r));
}

bool FeatureStore::add(FeatureRecord r) {
  if (by_id_.count(r.id)) return false;
  if (!r.has_pron()) ++unpronounced;
  by_id_.emplace(r.id, records_.size());
  records_.push_back(std::move(r));
  return true;
}

std::optional<std::size_t> FeatureStore::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

FeatureStore ingest(std::istream& in) {
  FeatureStore store;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      FeatureRecord r = feature_from_json(nlohmann::json::parse(line));
      const std::string id = r.id;
      if (!store.add(std::move(r))) {
        store.diagnostics.push_back(
            {lineno, "duplicate id '" + id + "', keeping first"});
      }
    } catch (const nlohmann::json::exception& e) {
      store.diagnostics.push_back({lineno, std::string("bad JSON: ") + e.what()});
    } catch (const DataError& e) {
      store.diagnostics.push_back({lineno, e.what()});
    }
  }
  return store;
}

FeatureStore ingest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open feature file '" + path + "'");
  return ingest(in);
}

void write_features(std::ostream& out, const std::vector<FeatureRecord>& rs) {
  for (const auto& r : rs) out << to_json(r).dump() << '\n';
}

}  // namespace nbrs::geo
