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

#include "nbrs/model/config.hpp"

#include <algorithm>
#include <cmath>

#include "nbrs/errors.hpp"

namespace nbrs::model {

void ModelConfig::validate() const {
  if (layers == 0) throw UsageError("layers must be >= 1");
  if (heads == 0 || emb_size % heads != 0) {
    throw UsageError("emb_size must be divisible by heads");
  }
  if (hidden == 0) throw UsageError("hidden must be >= 1");
  if (latlong_grid_n == 0) throw UsageError("latlong_grid_n must be >= 1");
  if (use_latlong && emb_size % 2 != 0) {
    throw UsageError("lat-long embeddings need an even emb_size");
  }
  if (use_neighbors && nneigh == 0) throw UsageError("nneigh must be >= 1");
  if (name_len == 0 || pron_len < 2) {
    throw UsageError("name_len must be >= 1 and pron_len >= 2");
  }
  for (double r : {dropout, neighbor_dropout}) {
    if (!(r >= 0.0 && r <= 1.0)) throw UsageError("dropout rates lie in [0, 1]");
  }
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) {
    throw UsageError("label_smoothing must lie in [0, 1)");
  }
  if (!(bounds.lat_max > bounds.lat_min && bounds.lon_max > bounds.lon_min)) {
    throw UsageError("lat-long bounds are empty");
  }
  if (beam == 0) throw UsageError("beam must be >= 1");
}

nlohmann::json to_json(const ModelConfig& c) {
  return {
      {"layers", c.layers},
      {"heads", c.heads},
      {"emb_size", c.emb_size},
      {"hidden", c.hidden},
      {"dropout", c.dropout},
      {"label_smoothing", c.label_smoothing},
      {"latlong_grid_n", c.latlong_grid_n},
      {"beam", c.beam},
      {"input_vocab", c.input_vocab},
      {"output_vocab", c.output_vocab},
      {"name_len", c.name_len},
      {"pron_len", c.pron_len},
      {"nneigh", c.nneigh},
      {"use_neighbors", c.use_neighbors},
      {"use_latlong", c.use_latlong},
      {"neighbor_dropout", c.neighbor_dropout},
      {"shuffle_neighbors", c.shuffle_neighbors},
      {"bounds",
       {{"lat_min", c.bounds.lat_min},
        {"lat_max", c.bounds.lat_max},
        {"lon_min", c.bounds.lon_min},
        {"lon_max", c.bounds.lon_max}}},
      {"interleave", c.interleave},
      {"token_level", c.token_level},
      {"max_memory", c.max_memory},
  };
}

ModelConfig config_from_json(const nlohmann::json& j, ModelConfig c) {
  if (!j.is_object()) throw UsageError("model config must be a JSON object");
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("layers", c.layers);
    get("heads", c.heads);
    get("emb_size", c.emb_size);
    get("hidden", c.hidden);
    get("dropout", c.dropout);
    get("label_smoothing", c.label_smoothing);
    get("latlong_grid_n", c.latlong_grid_n);
    get("beam", c.beam);
    get("input_vocab", c.input_vocab);
    get("output_vocab", c.output_vocab);
    get("name_len", c.name_len);
    get("pron_len", c.pron_len);
    get("nneigh", c.nneigh);
    get("use_neighbors", c.use_neighbors);
    get("use_latlong", c.use_latlong);
    get("neighbor_dropout", c.neighbor_dropout);
    get("shuffle_neighbors", c.shuffle_neighbors);
    get("interleave", c.interleave);
    get("token_level", c.token_level);
    get("max_memory", c.max_memory);
    if (j.contains("bounds")) {
      const auto& b = j.at("bounds");
      c.bounds.lat_min = b.value("lat_min", c.bounds.lat_min);
      c.bounds.lat_max = b.value("lat_max", c.bounds.lat_max);
      c.bounds.lon_min = b.value("lon_min", c.bounds.lon_min);
      c.bounds.lon_max = b.value("lon_max", c.bounds.lon_max);
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad model config: ") + e.what());
  }
  return c;
}

namespace {

std::size_t axis_cell(double x, double lo, double hi, std::size_t n,
                      bool* clamped) {
  const double f = std::floor((x - lo) / (hi - lo) * static_cast<double>(n));
  if (x < lo || x > hi) *clamped = true;
  if (f < 0.0) return 0;
  if (f >= static_cast<double>(n)) return n - 1;
  return static_cast<std::size_t>(f);
}

}  // namespace

GridCell latlong_cell(double lat, double lon, const LatLonBounds& b,
                      std::size_t n) {
  GridCell c;
  c.lat = axis_cell(lat, b.lat_min, b.lat_max, n, &c.clamped);
  c.lon = axis_cell(lon, b.lon_min, b.lon_max, n, &c.clamped);
  return c;
}

}  // namespace nbrs::model
