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
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nbrs/geodata/neighborhood.hpp"
#include "nbrs/model/config.hpp"
#include "nbrs/textdata/vocab.hpp"

namespace nbrs::model {

// Input vocabulary covers target and neighbor names; output vocabulary
// covers pronunciations. In token-level mode symbols are space-separated
// tokens instead of characters.
struct Vocabs {
  text::Vocabulary input;
  text::Vocabulary output;
  bool token_level = false;

  nlohmann::json to_json() const;
  static Vocabs from_json(const nlohmann::json& j);
};

Vocabs build_vocabs(std::span<const geo::Neighborhood> data,
                    const ModelConfig& cfg);

// Model-ready ids without BOS/EOS or padding.
struct Example {
  std::vector<int> inp;
  std::vector<std::vector<int>> nb_name;
  std::vector<std::vector<int>> nb_pron;
  std::vector<int> target;  // empty when the reference is unknown
  std::size_t lat_cell = 0;
  std::size_t lon_cell = 0;
};

struct PrepareStats {
  std::size_t truncated = 0;
  std::size_t unk_tokens = 0;
  std::size_t clamped_coords = 0;
  std::size_t dropped_neighbors = 0;  // beyond nneigh
};

// Sequences are cut to name_len (names), pron_len (neighbor prons) and
// pron_len - 1 (target, leaving room for EOS). Only the first nneigh
// neighbors are kept.
Example prepare_example(const geo::Neighborhood& n, const Vocabs& v,
                        const ModelConfig& cfg, PrepareStats* stats = nullptr);
std::vector<Example> prepare_examples(std::span<const geo::Neighborhood> data,
                                      const Vocabs& v, const ModelConfig& cfg,
                                      PrepareStats* stats = nullptr);

// Inverse of the output tokenization.
std::string output_string(const Vocabs& v, std::span<const int> ids);

}  // namespace nbrs::model
