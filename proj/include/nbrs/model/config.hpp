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

#include "json.hpp"

namespace nbrs::model {

struct LatLonBounds {
  double lat_min = 30.0;
  double lat_max = 46.0;
  double lon_min = 128.0;
  double lon_max = 146.0;
};

// Defaults are the full-size transformer settings.
struct ModelConfig {
  std::size_t layers = 4;
  std::size_t heads = 8;
  std::size_t emb_size = 256;
  std::size_t hidden = 256;
  double dropout = 0.1;
  double label_smoothing = 0.2;
  std::size_t latlong_grid_n = 100;
  std::size_t beam = 8;
  std::size_t input_vocab = 4710;
  std::size_t output_vocab = 427;
  std::size_t name_len = 20;
  std::size_t pron_len = 40;
  std::size_t nneigh = 30;
  bool use_neighbors = true;
  bool use_latlong = false;
  double neighbor_dropout = 0.10;
  bool shuffle_neighbors = true;
  LatLonBounds bounds;
  // Cognate mode: token-level vocabularies and per-token memory.
  bool interleave = false;
  bool token_level = false;
  std::size_t max_memory = 512;

  // Throws UsageError on inconsistent settings.
  void validate() const;
};

nlohmann::json to_json(const ModelConfig& c);
// Missing keys keep the values already in `base`.
ModelConfig config_from_json(const nlohmann::json& j, ModelConfig base = {});

struct GridCell {
  std::size_t lat = 0;
  std::size_t lon = 0;
  bool clamped = false;
};

// cell = clamp(floor((x - min) / (max - min) * n), 0, n - 1) per axis.
GridCell latlong_cell(double lat, double lon, const LatLonBounds& b,
                      std::size_t n);

}  // namespace nbrs::model
