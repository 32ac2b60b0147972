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
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace nbrs::geo {

enum class FeatureType {
  kMunicipality,
  kStreet,
  kBuilding,
  kEstablishment,
  kTopographic,
  kStation,
  kOther,
};

std::string_view to_string(FeatureType t);
// Unknown names map to kOther.
FeatureType feature_type_from_string(std::string_view s);

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

struct FeatureRecord {
  std::string id;    // hexadecimal feature id
  std::string name;  // original spelling
  std::string pron;  // hiragana; empty when the feature has no pronunciation
  LatLon pos;
  FeatureType ftype = FeatureType::kOther;

  bool has_pron() const { return !pron.empty(); }
};

nlohmann::json to_json(const FeatureRecord& r);
// Throws DataError naming the offending field.
FeatureRecord feature_from_json(const nlohmann::json& j);

struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

// Immutable after ingest; records keep input order.
class FeatureStore {
 public:
  FeatureStore() = default;
  explicit FeatureStore(std::vector<FeatureRecord> records);

  // Returns false (and records nothing) when the id is already present.
  bool add(FeatureRecord r);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const FeatureRecord& operator[](std::size_t i) const { return records_[i]; }
  const std::vector<FeatureRecord>& records() const { return records_; }
  std::optional<std::size_t> find(std::string_view id) const;

  std::vector<Diagnostic> diagnostics;
  std::size_t unpronounced = 0;

 private:
  std::vector<FeatureRecord> records_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// JSON-lines input, one FeatureRecord per line. Malformed lines are skipped
// with a diagnostic; duplicate ids keep the first record. Katakana
// pronunciations are folded to hiragana.
FeatureStore ingest(std::istream& in);
FeatureStore ingest(const std::string& path);

void write_features(std::ostream& out, const std::vector<FeatureRecord>& rs);

}  // namespace nbrs::geo
